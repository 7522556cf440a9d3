"""Blind extraction: reselect blocks, read the (1, 1) phase, combine and decode."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import transforms
from .embed import EMBED_COEFF, EmbedConfig, frame_chip_schedule, select_blocks
from .payload import CHIPS, CODEWORD, SPREAD, decode_chips
from .video import Clip, FramePlanes, tile_blocks


def bpsk_demodulate(coeff):
    """Soft chip ``sin(phase)``: +1 at +pi/2, -1 at -pi/2, 0 for a zero coefficient.

    The hard chip is the sign, with 0 resolving to +1.
    """
    c = np.asarray(coeff, dtype=np.complex128)
    mag = np.abs(c)
    soft = np.where(mag > 0, c.imag / np.where(mag > 0, mag, 1.0), 0.0)
    return soft[()] if soft.ndim == 0 else soft


def hard_chips(soft) -> np.ndarray:
    return np.where(np.asarray(soft) >= 0, 1, -1).astype(np.int8)


def extract_frame(frame: FramePlanes, cfg: EmbedConfig) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(soft chips, selected block indices)`` for one frame."""
    coeffs = transforms.forward(cfg.transform, tile_blocks(frame.y.astype(np.float64)))
    selected = select_blocks(coeffs, cfg.selected_blocks_per_frame, cfg.transform)
    u, v = EMBED_COEFF
    return bpsk_demodulate(coeffs[selected, u, v]), selected


class SoftChipAccumulator:
    """Running soft-chip sums per payload slot; merging is slot-wise addition."""

    def __init__(self, slots: int = CHIPS):
        self.sums = np.zeros(slots)
        self.counts = np.zeros(slots, dtype=np.int64)

    def add(self, slots: np.ndarray, soft: np.ndarray) -> None:
        np.add.at(self.sums, slots, soft)
        np.add.at(self.counts, slots, 1)

    def merge(self, other: "SoftChipAccumulator") -> "SoftChipAccumulator":
        out = SoftChipAccumulator(self.sums.size)
        out.sums = self.sums + other.sums
        out.counts = self.counts + other.counts
        return out


@dataclass
class Extraction:
    logo: np.ndarray
    confidence: np.ndarray
    accumulator: SoftChipAccumulator
    scenes: int

    @property
    def chips_seen(self) -> np.ndarray:
        return self.accumulator.counts

    def confidence_histogram(self, bins: int = 10) -> np.ndarray:
        return np.histogram(self.confidence, bins=bins, range=(0.0, 1.0))[0]

    def diagnostics(self) -> dict:
        counts = self.accumulator.counts
        return {
            "scenes": self.scenes,
            "slots_covered": int((counts > 0).sum()),
            "min_chips_per_slot": int(counts.min()),
            "max_chips_per_slot": int(counts.max()),
            "mean_confidence": float(self.confidence.mean()),
            "confidence_histogram": self.confidence_histogram().tolist(),
        }


def accumulate_clip(clip: Clip, cfg: EmbedConfig, accumulator: SoftChipAccumulator | None = None) -> tuple[SoftChipAccumulator, int]:
    acc = accumulator or SoftChipAccumulator()
    schedule = frame_chip_schedule(clip, cfg)
    for frame, (_, slots) in zip(clip, schedule):
        soft, selected = extract_frame(frame, cfg)
        acc.add(slots[selected], soft)
    scenes = schedule[-1][0] + 1 if schedule else 0
    return acc, scenes


def extract_clip(clip: Clip, cfg: EmbedConfig) -> Extraction:
    """Recover the logo; slots never observed stay at zero and decode by the tie rule."""
    acc, scenes = accumulate_clip(clip, cfg)
    logo, _ = decode_chips(acc.sums, cfg.keys)
    corr = acc.sums.reshape(-1, SPREAD) @ CODEWORD.astype(np.float64)
    seen = acc.counts.reshape(-1, SPREAD).sum(axis=1)
    confidence = np.abs(corr) / np.maximum(seen, 1)
    return Extraction(logo, confidence.reshape(logo.shape), acc, scenes)
