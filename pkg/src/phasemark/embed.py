"""Phase-domain BPSK embedding on 8x8 luma blocks.

Per frame: tile the luma plane, transform every block, pick the
``selected_blocks_per_frame`` least textured blocks, raise coefficient (1, 1)
to at least ``T`` and set its phase to +pi/2 (chip +1) or -pi/2 (chip -1),
then inverse transform, round and clamp. Chroma passes through untouched.

The 4752-chip payload is anchored to block positions rather than to the rank
of a block among the selected ones (see :class:`PayloadLayout`): a block that
drifts across the selection boundary then costs one chip instead of shifting
every chip after it. A QCIF frame has 396 positions, so one repetition spans
12 frames, and long scenes carry several repetitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import transforms
from .payload import CHIPS, SPREAD, KeySet, encode_logo
from .transforms import DFT, SCHT, N, SCHT_MATRIX
from .video import (
    DEFAULT_SCENE_THRESHOLD,
    BlockGrid,
    Clip,
    FramePlanes,
    detect_scenes,
    round_clamp,
    tile_blocks,
    untile_blocks,
)

EMBED_COEFF = (1, 1)
DEFAULT_SELECTED = 264
DEFAULT_T = {DFT: 10.0, SCHT: 13.0}
ROBUST_T = 22.0
QCIF_BLOCKS = 396

# T is given on the orthonormal coefficient scale; the unnormalized DFT is 8x larger
THRESHOLD_SCALE = {DFT: float(N), SCHT: 1.0}


def _scht_leak_bins() -> list[tuple[int, int]]:
    # bins that change when a lone (1, 1) edit is projected back to a real block
    mix = SCHT_MATRIX @ SCHT_MATRIX.T
    rows = np.flatnonzero(np.abs(mix[:, EMBED_COEFF[0]]) > 1e-12)
    return [(int(r), int(c)) for r in rows for c in rows]


EXCLUDED_BINS = {
    DFT: [(0, 0), EMBED_COEFF, transforms.conjugate_partner(*EMBED_COEFF)],
    SCHT: [(0, 0), EMBED_COEFF, *_scht_leak_bins()],
}


@dataclass(frozen=True)
class EmbedConfig:
    transform: str = SCHT
    boost_threshold: float | None = None
    selected_blocks_per_frame: int = DEFAULT_SELECTED
    keys: KeySet = field(default_factory=KeySet)
    scene_threshold: float = DEFAULT_SCENE_THRESHOLD
    # extra blocks just past the selection boundary that also get their chip;
    # costs PSNR, pays off when an attack reshuffles the selection (impulse noise)
    guard_blocks: int = 0

    def __post_init__(self):
        if self.transform not in transforms.KINDS:
            raise ValueError(f"transform must be one of {transforms.KINDS}, got {self.transform!r}")
        if self.boost_threshold is None:
            object.__setattr__(self, "boost_threshold", DEFAULT_T[self.transform])
        if not self.boost_threshold > 0:
            raise ValueError("boost threshold T must be positive")
        if self.selected_blocks_per_frame < 0:
            raise ValueError("selected_blocks_per_frame must be non-negative")
        if self.guard_blocks < 0:
            raise ValueError("guard_blocks must be non-negative")

    @property
    def embedded_blocks_per_frame(self) -> int:
        return self.selected_blocks_per_frame + self.guard_blocks

    @property
    def T(self) -> float:
        return float(self.boost_threshold)

    @property
    def raw_threshold(self) -> float:
        """T expressed in this transform's own coefficient units."""
        return self.T * THRESHOLD_SCALE[self.transform]

    def with_(self, **changes) -> "EmbedConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class PayloadLayout:
    """Assigns a payload slot to every block position of every frame in a scene.

    A repetition spans ``frames_per_repetition`` frames, i.e. a grid of
    frames x block positions with at least one cell per chip. The grid is cut
    into 3 x 3 groups (thirds of the repetition in time, horizontal bands of the
    frame in space), and chip ``j`` of bit ``k`` goes to time-third ``j`` and
    band ``(j + k + repetition) % 3``. The three chips of a bit therefore never
    share a frame or a band, so losing a frame or a strip of the picture costs
    each bit at most one chip. Cells are shuffled inside each group by a PCG64
    stream keyed on ``block_order_seed`` and the repetition number. Only
    selected blocks actually carry their chip.
    """

    blocks_per_frame: int = QCIF_BLOCKS
    block_order_seed: int = 0
    total_chips: int = CHIPS

    @property
    def frames_per_repetition(self) -> int:
        return math.ceil(self.total_chips / self.blocks_per_frame)

    def repetition(self, frame_in_scene: int) -> int:
        return frame_in_scene // self.frames_per_repetition

    def grid(self, repetition: int) -> np.ndarray:
        """Slot index per ``(frame in repetition, block position)`` cell."""
        frames, blocks = self.frames_per_repetition, self.blocks_per_frame
        rng = np.random.Generator(np.random.PCG64([self.block_order_seed, repetition]))
        cell_group = (np.arange(frames)[:, None] * SPREAD // frames) * SPREAD + np.arange(blocks) * SPREAD // blocks
        cell_group = cell_group.ravel()
        chip = np.arange(self.total_chips)
        bit, j = np.divmod(chip, SPREAD)
        chip_group = j * SPREAD + (j + bit + repetition) % SPREAD

        slots = np.full(frames * blocks, -1, dtype=np.int64)
        spill = []
        for g in range(SPREAD * SPREAD):
            cells = rng.permutation(np.flatnonzero(cell_group == g))
            chips = chip[chip_group == g]
            n = min(cells.size, chips.size)
            slots[cells[:n]] = chips[:n]
            spill.extend(chips[n:])
        free = rng.permutation(np.flatnonzero(slots < 0))
        slots[free[: len(spill)]] = spill
        # cells beyond the payload repeat a slot so every position carries a valid chip
        extra = free[len(spill) :]
        slots[extra] = extra % self.total_chips
        return slots.reshape(frames, blocks)

    def slots(self, frame_in_scene: int) -> np.ndarray:
        """Slot index for each block position (raster order) of this frame."""
        f = frame_in_scene % self.frames_per_repetition
        return self.grid(self.repetition(frame_in_scene))[f]


def selection_statistic(coeffs: np.ndarray, kind: str) -> np.ndarray:
    """Sum of coefficient magnitudes per block, skipping every bin the embedder touches."""
    mags = np.abs(coeffs)
    mask = np.ones((N, N), dtype=bool)
    for u, v in EXCLUDED_BINS[kind]:
        mask[u, v] = False
    return mags[..., mask].sum(axis=-1)


def select_blocks(coeffs: np.ndarray, n_select: int, kind: str = SCHT) -> np.ndarray:
    """Indices of the ``n_select`` lowest-statistic blocks, in raster order.

    Ties go to the lower raster index.
    """
    coeffs = np.asarray(coeffs)
    if n_select > coeffs.shape[0]:
        raise ValueError(f"cannot select {n_select} of {coeffs.shape[0]} blocks")
    order = np.argsort(selection_statistic(coeffs, kind), kind="stable")
    return np.sort(order[:n_select])


def amplitude_boost(coeff, T: float):
    """Raise magnitudes below ``T`` to exactly ``T``, keeping the phase (zero -> T + 0j)."""
    c = np.asarray(coeff, dtype=np.complex128)
    mag = np.abs(c)
    unit = np.where(mag > 0, c / np.where(mag > 0, mag, 1.0), 1.0)
    out = np.where(mag < T, T * unit, c)
    return out[()] if out.ndim == 0 else out


def bpsk_modulate(coeff, chip):
    """Replace the phase with +pi/2 for chip +1 and -pi/2 for chip -1."""
    c = np.asarray(coeff, dtype=np.complex128)
    chip = np.asarray(chip)
    if not np.isin(chip, (-1, 1)).all():
        raise ValueError("chips must be +1 or -1")
    mag = np.abs(c)
    if np.any(mag == 0):
        raise ValueError("cannot modulate a zero-magnitude coefficient; boost it first")
    out = 1j * mag * np.sign(chip)
    return out[()] if out.ndim == 0 else out


def scht_host_magnitude(coeff, chip, T: float):
    """Boost magnitude for SCHT so the chip survives the real-part projection.

    Dropping the imaginary residue of the inverse halves any edit of (1, 1):
    the coefficient read back is ``(c + target) / 2``. Raising the target to
    ``max(|c|, T + max(0, -chip * Im c))`` keeps ``chip * Im`` of that mean at
    or above ``T / 2``, whatever the original phase was.
    """
    c = np.asarray(coeff, dtype=np.complex128)
    chip = np.asarray(chip)
    return np.maximum(np.abs(amplitude_boost(c, T)), T + np.maximum(0.0, -chip * c.imag))


def embed_blocks(coeffs: np.ndarray, chips, cfg: EmbedConfig, selected: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient-domain embedding; returns ``(modified coeffs, embedded block indices)``.

    ``chips`` holds one chip per block position; only embedded blocks use theirs.
    """
    chips = np.asarray(chips)
    if chips.size != coeffs.shape[0]:
        raise ValueError(f"expected one chip per block ({coeffs.shape[0]}), got {chips.size}")
    if selected is None:
        n = min(cfg.embedded_blocks_per_frame, coeffs.shape[0])
        selected = select_blocks(coeffs, n, cfg.transform)
    out = np.array(coeffs, dtype=np.complex128, copy=True)
    u, v = EMBED_COEFF
    host, chip = out[selected, u, v], chips[selected]
    if cfg.transform == SCHT:
        host = scht_host_magnitude(host, chip, cfg.raw_threshold)
    else:
        host = amplitude_boost(host, cfg.raw_threshold)
    out[selected, u, v] = bpsk_modulate(host, chip)
    if cfg.transform == DFT:
        out[selected] = transforms.enforce_conjugate_symmetry(out[selected], EMBED_COEFF)
    return out, selected


def embed_luma(y: np.ndarray, chips, cfg: EmbedConfig) -> np.ndarray:
    """Embed into a luma plane and return the unrounded real-valued result."""
    h, w = y.shape
    coeffs = transforms.forward(cfg.transform, tile_blocks(np.asarray(y, dtype=np.float64)))
    marked, _ = embed_blocks(coeffs, chips, cfg)
    return untile_blocks(transforms.inverse(cfg.transform, marked), w, h)


def embed_frame(frame: FramePlanes, chips, cfg: EmbedConfig) -> FramePlanes:
    return frame.with_luma(round_clamp(embed_luma(frame.y, chips, cfg)))


def frame_chip_schedule(clip: Clip, cfg: EmbedConfig) -> list[tuple[int, np.ndarray]]:
    """Per frame: ``(scene index, chip slots)`` following the scene-restarting layout."""
    grid = BlockGrid.for_frame(clip.width, clip.height)
    layout = PayloadLayout(grid.total, cfg.keys.block_order_seed)
    schedule = []
    for scene, (start, end) in enumerate(detect_scenes(clip, cfg.scene_threshold)):
        for t in range(start, end):
            schedule.append((scene, layout.slots(t - start)))
    return schedule


def embed_clip(clip: Clip, logo, cfg: EmbedConfig) -> Clip:
    grid = BlockGrid.for_frame(clip.width, clip.height)
    if cfg.selected_blocks_per_frame > grid.total:
        raise ValueError(f"{cfg.selected_blocks_per_frame} blocks requested but a frame only has {grid.total}")
    stream = encode_logo(logo, cfg.keys)
    frames = [
        embed_frame(frame, stream[slots], cfg)
        for frame, (_, slots) in zip(clip, frame_chip_schedule(clip, cfg))
    ]
    return clip.replace(frames)
