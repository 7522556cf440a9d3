"""Deterministic attacks a-o applied to watermarked clips.

Every attack returns a clip with the input's frame size and frame count.
Random attacks draw from ``numpy.random.default_rng(seed)``, so the same
:class:`AttackSpec` always produces the same bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import cv2
import numpy as np
from scipy import fft, ndimage

from . import transforms
from .embed import EMBED_COEFF
from .transforms import DFT
from .video import Clip, FramePlanes, round_clamp, tile_blocks, untile_blocks

MID_GRAY = 128
PAINT_ROWS = (24, 64, 104)
PAINT_HEIGHT = 8
LOWPASS_SIGMA = 1.4
NOISE_STD = 0.01
SALT_PEPPER_DENSITY = 0.01
PHASE_MEAN = np.pi / 4
PHASE_VARIANCE = 0.01

# IJG/JPEG Annex K luminance quantization table
JPEG_LUMA_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.float64,
)


def _map_planes(clip: Clip, fn: Callable[[np.ndarray], np.ndarray], luma_only: bool = False) -> Clip:
    frames = []
    for f in clip:
        if luma_only:
            frames.append(f.with_luma(fn(f.y)))
        else:
            frames.append(FramePlanes(fn(f.y), fn(f.u), fn(f.v)))
    return clip.replace(frames)


def attack_resize(clip: Clip) -> Clip:
    """Bilinear downscale by 2 and back up, every plane."""

    def resize(plane):
        h, w = plane.shape
        small = cv2.resize(plane, (w // 2, h // 2), interpolation=cv2.INTER_LINEAR)
        return cv2.resize(small, (w, h), interpolation=cv2.INTER_LINEAR)

    return _map_planes(clip, resize)


def attack_rotate90_roundtrip(clip: Clip) -> Clip:
    return _map_planes(clip, lambda p: np.ascontiguousarray(np.rot90(np.rot90(p, -1), 1)))


def _fill(plane: np.ndarray, keep: np.ndarray) -> np.ndarray:
    return np.where(keep, plane, np.uint8(MID_GRAY))


def _region_mask(shape, top, left, height, width, inside: bool) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    mask[top : top + height, left : left + width] = True
    return ~mask if inside else mask


def attack_crop_quarter(clip: Clip) -> Clip:
    """Blank the top-left quarter of every plane to mid-gray."""

    def crop(plane):
        h, w = plane.shape
        return _fill(plane, _region_mask(plane.shape, 0, 0, h // 2, w // 2, inside=True))

    return _map_planes(clip, crop)


def attack_crop_center_keep(clip: Clip) -> Clip:
    """Keep only the central half-width, half-height window; the rest goes mid-gray."""

    def crop(plane):
        h, w = plane.shape
        return _fill(plane, _region_mask(plane.shape, h // 4, w // 4, h // 2, w // 2, inside=False))

    return _map_planes(clip, crop)


def attack_paint(clip: Clip, rows=PAINT_ROWS, height: int = PAINT_HEIGHT) -> Clip:
    """Three full-width black bars on the luma plane."""

    def paint(y):
        y = y.copy()
        for r in rows:
            y[r : r + height, :] = 0
        return y

    return _map_planes(clip, paint, luma_only=True)


def gaussian_kernel(size: int = 3, sigma: float = LOWPASS_SIGMA) -> np.ndarray:
    r = np.arange(size) - (size - 1) / 2
    g = np.exp(-(r[:, None] ** 2 + r[None, :] ** 2) / (2 * sigma * sigma))
    return g / g.sum()


def _blur(y: np.ndarray, sigma: float) -> np.ndarray:
    return ndimage.correlate(y.astype(np.float64), gaussian_kernel(3, sigma), mode="nearest")


def attack_gaussian_lowpass(clip: Clip, sigma: float = LOWPASS_SIGMA) -> Clip:
    return _map_planes(clip, lambda y: round_clamp(_blur(y, sigma)), luma_only=True)


def attack_sharpen(clip: Clip, amount: float = 1.0, sigma: float = LOWPASS_SIGMA) -> Clip:
    """Unsharp mask ``y + amount * (y - blur(y))`` on luma."""

    def sharpen(y):
        yf = y.astype(np.float64)
        return round_clamp(yf + amount * (yf - _blur(y, sigma)))

    return _map_planes(clip, sharpen, luma_only=True)


def attack_gaussian_noise(clip: Clip, seed: int = 0, std: float = NOISE_STD) -> Clip:
    """Additive white noise; ``std`` is on the [0, 1] intensity scale."""
    rng = np.random.default_rng(seed)
    return _map_planes(clip, lambda y: round_clamp(y + rng.normal(0.0, std * 255.0, y.shape)), luma_only=True)


def attack_salt_pepper(clip: Clip, density: float = SALT_PEPPER_DENSITY, seed: int = 0) -> Clip:
    """Set a ``density`` fraction of luma samples to 0 or 255 with equal odds."""
    rng = np.random.default_rng(seed)

    def noise(y):
        hit = rng.random(y.shape) < density
        salt = rng.random(y.shape) < 0.5
        return np.where(hit, np.where(salt, 255, 0), y).astype(np.uint8)

    return _map_planes(clip, noise, luma_only=True)


def attack_phase_perturb(
    clip: Clip,
    kind: str,
    seed: int = 0,
    mean: float = PHASE_MEAN,
    variance: float = PHASE_VARIANCE,
) -> Clip:
    """Rotate the phase of coefficient (1, 1) of every 8x8 block by N(mean, variance)."""
    rng = np.random.default_rng(seed)
    u, v = EMBED_COEFF

    def perturb(y):
        h, w = y.shape
        coeffs = transforms.forward(kind, tile_blocks(y.astype(np.float64)))
        theta = rng.normal(mean, np.sqrt(variance), coeffs.shape[0])
        coeffs[:, u, v] *= np.exp(1j * theta)
        if kind == DFT:
            coeffs = transforms.enforce_conjugate_symmetry(coeffs, EMBED_COEFF)
        return round_clamp(untile_blocks(transforms.inverse(kind, coeffs), w, h))

    return _map_planes(clip, perturb, luma_only=True)


def histeq_plane(y: np.ndarray) -> np.ndarray:
    """Classic 256-bin equalization: ``round((cdf - cdf_min) / (n - cdf_min) * 255)``."""
    hist = np.bincount(y.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    cdf_min = cdf[np.flatnonzero(hist)[0]]
    n = y.size
    if n == cdf_min:
        return y.copy()
    lut = np.floor((cdf - cdf_min) / (n - cdf_min) * 255 + 0.5)
    return np.clip(lut, 0, 255).astype(np.uint8)[y]


def attack_histeq(clip: Clip) -> Clip:
    return _map_planes(clip, histeq_plane, luma_only=True)


def quant_table(quality: int) -> np.ndarray:
    """IJG quality scaling of the luminance table; quality 100 gives all ones."""
    if not 1 <= quality <= 100:
        raise ValueError(f"quality must be in 1..100, got {quality}")
    scale = 5000 / quality if quality < 50 else 200 - 2 * quality
    return np.clip(np.floor((JPEG_LUMA_TABLE * scale + 50) / 100), 1, 255)


def _dct_quantize(plane: np.ndarray, table: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    blocks = tile_blocks(plane.astype(np.float64) - 128.0)
    coeffs = fft.dctn(blocks, axes=(1, 2), norm="ortho")
    coeffs = np.round(coeffs / table) * table
    return round_clamp(untile_blocks(fft.idctn(coeffs, axes=(1, 2), norm="ortho"), w, h) + 128.0)


def attack_intra_compress(clip: Clip, quality: int = 75) -> Clip:
    """Intra-only JPEG-style coding: orthonormal 8x8 DCT, quantize, reconstruct."""
    table = quant_table(quality)
    return _map_planes(clip, lambda p: _dct_quantize(p, table))


def attack_external(clip: Clip, path) -> Clip:
    """Substitute a clip that was compressed and decoded by an external codec."""
    from .video import read_yuv420

    other = read_yuv420(Path(path), clip.width, clip.height, clip.frame_rate)
    if len(other) != len(clip):
        raise ValueError(f"external clip has {len(other)} frames, expected {len(clip)}")
    return other


def _pick_frames(n: int, fraction: float, rng: np.random.Generator, exclude_first: bool) -> np.ndarray:
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    candidates = np.arange(1 if exclude_first else 0, n)
    k = min(int(round(fraction * n)), candidates.size)
    return np.sort(rng.choice(candidates, size=k, replace=False))


def attack_frame_drop(clip: Clip, fraction: float = 0.6, seed: int = 0) -> Clip:
    """Drop frames and hold the previous surviving frame in their place."""
    rng = np.random.default_rng(seed)
    dropped = set(_pick_frames(len(clip), fraction, rng, exclude_first=True).tolist())
    frames = list(clip.frames)
    for t in range(1, len(frames)):
        if t in dropped:
            frames[t] = frames[t - 1]
    return clip.replace(frames)


def attack_frame_average(clip: Clip, window: int = 3) -> Clip:
    """Replace every frame by the mean of a centred ``window`` (clipped at the ends)."""
    if window < 1:
        raise ValueError("window must be at least 1")
    n = len(clip)
    half_lo = (window - 1) // 2
    half_hi = window // 2
    stacks = {name: np.stack([getattr(f, name).astype(np.float64) for f in clip]) for name in ("y", "u", "v")}
    frames = []
    for t in range(n):
        lo, hi = max(0, t - half_lo), min(n, t + half_hi + 1)
        frames.append(FramePlanes(*(round_clamp(stacks[p][lo:hi].mean(axis=0)) for p in ("y", "u", "v"))))
    return clip.replace(frames)


def attack_frame_swap(clip: Clip, fraction: float = 0.6, seed: int = 0) -> Clip:
    """Swap disjoint adjacent pairs (2k, 2k+1) covering ``fraction`` of the frames."""
    rng = np.random.default_rng(seed)
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    n = len(clip)
    pairs = n // 2
    k = min(int(round(fraction * n / 2)), pairs)
    chosen = rng.choice(pairs, size=k, replace=False)
    frames = list(clip.frames)
    for p in chosen:
        frames[2 * p], frames[2 * p + 1] = frames[2 * p + 1], frames[2 * p]
    return clip.replace(frames)


@dataclass(frozen=True)
class AttackSpec:
    """A named attack with its parameters.

    Serialized as ``key=value`` lines, e.g. ``kind=GaussianNoise``,
    ``std=0.01``, ``seed=7``.
    """

    kind: str
    params: dict = field(default_factory=dict)
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in ATTACKS:
            raise ValueError(f"unknown attack {self.kind!r}; known: {', '.join(ATTACKS)}")
        unknown = set(self.params) - set(ATTACKS[self.kind].params)
        if unknown:
            raise ValueError(f"{self.kind} does not take {sorted(unknown)}")

    def apply(self, clip: Clip, transform: str = DFT) -> Clip:
        entry = ATTACKS[self.kind]
        kwargs = dict(self.params)
        if entry.seeded:
            kwargs["seed"] = self.rng_seed
        if entry.needs_transform:
            kwargs["kind"] = transform
        return entry.fn(clip, **kwargs)

    @property
    def label(self) -> str:
        if not self.params:
            return self.kind
        return self.kind + "(" + ",".join(f"{k}={v}" for k, v in sorted(self.params.items())) + ")"

    def to_text(self) -> str:
        lines = [f"kind={self.kind}", f"seed={self.rng_seed}"]
        lines += [f"{k}={v}" for k, v in sorted(self.params.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "AttackSpec":
        values = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"expected key=value, got {raw!r}")
            values[key.strip()] = value.strip()
        if "kind" not in values:
            raise ValueError("attack config needs a kind= line")
        kind = values.pop("kind")
        seed = int(values.pop("seed", 0))
        params = {k: _parse_number(v) if k != "path" else v for k, v in values.items()}
        return cls(kind, params, seed)


def _parse_number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


@dataclass(frozen=True)
class _Entry:
    fn: Callable
    params: tuple[str, ...] = ()
    seeded: bool = False
    needs_transform: bool = False


ATTACKS: dict[str, _Entry] = {
    "None": _Entry(lambda clip: clip),
    "Resize": _Entry(attack_resize),
    "Rotate90RoundTrip": _Entry(attack_rotate90_roundtrip),
    "CropQuarter": _Entry(attack_crop_quarter),
    "CropCenterKeep": _Entry(attack_crop_center_keep),
    "Paint": _Entry(attack_paint),
    "GaussianLowpass": _Entry(attack_gaussian_lowpass, ("sigma",)),
    "Sharpen": _Entry(attack_sharpen, ("amount", "sigma")),
    "GaussianNoise": _Entry(attack_gaussian_noise, ("std",), seeded=True),
    "SaltPepper": _Entry(attack_salt_pepper, ("density",), seeded=True),
    "PhasePerturb": _Entry(attack_phase_perturb, ("mean", "variance"), seeded=True, needs_transform=True),
    "HistEq": _Entry(attack_histeq),
    "IntraCompress": _Entry(attack_intra_compress, ("quality",)),
    "External": _Entry(attack_external, ("path",)),
    "FrameDrop": _Entry(attack_frame_drop, ("fraction",), seeded=True),
    "FrameAverage": _Entry(attack_frame_average, ("window",)),
    "FrameSwap": _Entry(attack_frame_swap, ("fraction",), seeded=True),
}
