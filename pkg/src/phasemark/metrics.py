"""Transparency and recovery metrics, and the per-run report row."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .payload import LOGO_BITS
from .video import Clip, FramePlanes

PEAK = 255.0


def mse(reference, test) -> float:
    a = np.asarray(reference, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(reference, test) -> float:
    """Luma PSNR in dB; ``math.inf`` for identical planes.

    Accepts ``FramePlanes`` or bare luma arrays.
    """
    if isinstance(reference, FramePlanes):
        reference = reference.y
    if isinstance(test, FramePlanes):
        test = test.y
    err = mse(reference, test)
    if err == 0:
        return math.inf
    return 20 * math.log10(PEAK / math.sqrt(err))


def clip_psnr(reference: Clip, test: Clip) -> tuple[list[float], float, int]:
    """Per-frame PSNR, mean over finite frames, and the number of infinite frames."""
    if len(reference) != len(test):
        raise ValueError(f"clip lengths differ: {len(reference)} vs {len(test)}")
    per_frame = [psnr(a, b) for a, b in zip(reference, test)]
    finite = [p for p in per_frame if math.isfinite(p)]
    mean = float(np.mean(finite)) if finite else math.inf
    return per_frame, mean, len(per_frame) - len(finite)


def _logos(w, w2) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(w, dtype=np.int64)
    b = np.asarray(w2, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError(f"logo shapes differ: {a.shape} vs {b.shape}")
    return a, b


def normalized_correlation(w, w_extracted) -> float:
    """sum(w * w') / sum(w^2) with bits as 0/1.

    Deliberately asymmetric: zero bits of the reference never count, so an
    all-ones extraction scores 1.
    """
    a, b = _logos(w, w_extracted)
    denom = int((a * a).sum())
    if denom == 0:
        raise ValueError("reference logo has no 1-bits; NC is undefined")
    return float((a * b).sum() / denom)


def bit_errors(w, w_extracted) -> int:
    a, b = _logos(w, w_extracted)
    return int((a != b).sum())


def bit_error_rate(w, w_extracted) -> float:
    return bit_errors(w, w_extracted) / np.asarray(w).size


# column order of RunReport.csv_row; stable, extend only at the end
CSV_COLUMNS = (
    "transform",
    "T",
    "attack",
    "params",
    "seed",
    "eBits",
    "NC",
    "BER",
    "mean_psnr",
    "inf_frames",
    "complex_adds",
    "complex_mults",
    "wall_time_s",
)


@dataclass
class RunReport:
    transform: str
    T: float
    attack: str
    params: str = ""
    seed: int = 0
    ebits: int = 0
    nc: float = 1.0
    frame_psnr: list[float] = field(default_factory=list)
    mean_psnr: float = math.inf
    inf_frames: int = 0
    complex_adds: int = 0
    complex_mults: int = 0
    wall_time: float | None = None

    def __post_init__(self):
        if not 0 <= self.ebits <= LOGO_BITS:
            raise ValueError(f"eBits must lie in [0, {LOGO_BITS}], got {self.ebits}")

    @property
    def ber(self) -> float:
        return self.ebits / LOGO_BITS

    def csv_row(self) -> list[str]:
        return [
            self.transform,
            f"{self.T:g}",
            self.attack,
            self.params,
            str(self.seed),
            str(self.ebits),
            f"{self.nc:.4f}",
            f"{self.ber:.6f}",
            "inf" if math.isinf(self.mean_psnr) else f"{self.mean_psnr:.4f}",
            str(self.inf_frames),
            str(self.complex_adds),
            str(self.complex_mults),
            "" if self.wall_time is None else f"{self.wall_time:.3f}",
        ]

    def text_block(self) -> str:
        psnr_text = "inf" if math.isinf(self.mean_psnr) else f"{self.mean_psnr:.2f} dB"
        lines = [
            f"transform  {self.transform} (T={self.T:g})",
            f"attack     {self.attack} {self.params}".rstrip() + f" seed={self.seed}",
            f"eBits      {self.ebits} / {LOGO_BITS}  (BER {self.ber:.4%})",
            f"NC         {self.nc:.4f}",
            f"PSNR       {psnr_text} mean over frames, {self.inf_frames} identical frames",
            f"ops        {self.complex_adds} complex adds, {self.complex_mults} complex mults per 8x8 transform",
        ]
        if self.wall_time is not None:
            lines.append(f"wall time  {self.wall_time:.3f} s")
        return "\n".join(lines)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        writer.writerow(r.csv_row())
    return buf.getvalue()
