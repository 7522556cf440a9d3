"""Deterministic synthetic QCIF clips and logos for tests, demos and benchmarks.

Each clip mixes a smooth shaded background (gradients plus soft blobs) with
band-limited texture, a little per-frame sensor grain and some motion, so
that block statistics look roughly like those of natural low-resolution video.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .payload import LOGO_HEIGHT, LOGO_WIDTH
from .video import QCIF_HEIGHT, QCIF_WIDTH, Clip, FramePlanes

CLIP_KINDS = ("studio", "pan", "harbor")


def _smooth_noise(rng: np.random.Generator, shape, sigma: float) -> np.ndarray:
    field = ndimage.gaussian_filter(rng.standard_normal(shape), sigma, mode="wrap")
    return field / (field.std() + 1e-12)


def _background(rng, h, w) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    gx, gy = rng.uniform(-0.25, 0.25, 2)
    base = rng.uniform(90, 150) + gx * (xx - w / 2) + gy * (yy - h / 2)
    for _ in range(4):
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        r = rng.uniform(12, 40)
        base += rng.uniform(-35, 35) * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * r * r))
    return base


def _chroma(rng, h, w, t) -> tuple[np.ndarray, np.ndarray]:
    yy, xx = np.mgrid[0 : h // 2, 0 : w // 2].astype(np.float64)
    u = 128 + 12 * np.sin(xx / 17 + t * 0.05) + rng.uniform(-4, 4)
    v = 128 + 10 * np.cos(yy / 13 - t * 0.04) + rng.uniform(-4, 4)
    return u, v


def _frame(y, u, v) -> FramePlanes:
    q = lambda a: np.clip(np.floor(a + 0.5), 0, 255).astype(np.uint8)  # noqa: E731
    return FramePlanes(q(y), q(u), q(v))


def synthetic_clip(
    kind: str = "studio",
    n_frames: int = 36,
    seed: int = 0,
    width: int = QCIF_WIDTH,
    height: int = QCIF_HEIGHT,
    grain: float = 1.0,
) -> Clip:
    """Build a clip of ``n_frames`` frames.

    ``studio``: textured object drifting over a shaded backdrop.
    ``pan``: slow horizontal pan over a wide textured panorama.
    ``harbor``: flat sky and water with a textured band that ripples in time.
    """
    if kind not in CLIP_KINDS:
        raise ValueError(f"unknown synthetic clip kind {kind!r}; choose from {CLIP_KINDS}")
    rng = np.random.default_rng(seed)
    h, w = height, width
    frames = []
    if kind == "studio":
        bg = _background(rng, h, w)
        tex = 18 * _smooth_noise(rng, (h, w), 1.2)
        yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
        for t in range(n_frames):
            cx = w * 0.55 + 20 * np.sin(2 * np.pi * t / 48)
            cy = h * 0.5 + 8 * np.cos(2 * np.pi * t / 60)
            mask = np.exp(-(((xx - cx) / 34) ** 6 + ((yy - cy) / 30) ** 6))
            shifted = np.roll(tex, (int(round(cy - h / 2)), int(round(cx - w / 2))), axis=(0, 1))
            y = bg + mask * (shifted + 15) + grain * rng.standard_normal((h, w))
            frames.append(_frame(y, *_chroma(rng, h, w, t)))
    elif kind == "pan":
        pano_w = w + 2 * n_frames + 8
        bg = _background(rng, h, pano_w)
        tex = 10 * _smooth_noise(rng, (h, pano_w), 1.5) * (0.3 + np.abs(_smooth_noise(rng, (h, pano_w), 14)))
        pano = bg + tex
        for t in range(n_frames):
            x0 = 2 * t
            y = pano[:, x0 : x0 + w] + grain * rng.standard_normal((h, w))
            frames.append(_frame(y, *_chroma(rng, h, w, t)))
    else:
        yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
        sky = 170 - 0.3 * yy + 3 * _smooth_noise(rng, (h, w), 10)
        water = 80 + 0.2 * yy + 3 * _smooth_noise(rng, (h, w), 10)
        horizon = h * 0.45
        band = (np.abs(yy - horizon) < 18).astype(np.float64)
        band = ndimage.gaussian_filter(band, 2)
        tex = 22 * _smooth_noise(rng, (h, w), 1.0)
        for t in range(n_frames):
            ripple = 4 * np.sin(xx / 6 + yy / 3 + t * 0.4) * (yy > horizon)
            base = np.where(yy < horizon, sky, water) + ripple
            y = base + band * np.roll(tex, t, axis=1) + grain * rng.standard_normal((h, w))
            frames.append(_frame(y, *_chroma(rng, h, w, t)))
    return Clip(tuple(frames))


def synthetic_logo(seed: int = 0) -> np.ndarray:
    """A 36x44 binary mark: a bordered ring with a bar and a seeded speckle."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:LOGO_HEIGHT, 0:LOGO_WIDTH]
    r = np.hypot(yy - LOGO_HEIGHT / 2 + 0.5, xx - LOGO_WIDTH / 2 + 0.5)
    logo = (r > 9) & (r < 14)
    logo |= (np.abs(yy - LOGO_HEIGHT / 2 + 0.5) < 2) & (np.abs(xx - LOGO_WIDTH / 2 + 0.5) < 11)
    logo[[0, -1], :] = True
    logo[:, [0, -1]] = True
    logo ^= rng.random(logo.shape) < 0.05
    return logo.astype(np.uint8)


def random_frame(rng: np.random.Generator, width: int = QCIF_WIDTH, height: int = QCIF_HEIGHT) -> FramePlanes:
    """Uniform-noise luma with neutral chroma."""
    return FramePlanes(
        rng.integers(0, 256, (height, width), dtype=np.uint8),
        np.full((height // 2, width // 2), 128, np.uint8),
        np.full((height // 2, width // 2), 128, np.uint8),
    )
