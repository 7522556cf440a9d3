"""Raw I420 clips, colour conversion, scene cuts and 8x8 luma tiling."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Sequence

import cv2
import numpy as np
from scipy import ndimage

QCIF_WIDTH = 176
QCIF_HEIGHT = 144
BLOCK = 8
DEFAULT_SCENE_THRESHOLD = 0.4
HIST_BINS = 64
# histograms are blurred across bins so intensity remapping (e.g. equalization) is not read as a cut
HIST_SMOOTHING = 1.5


@dataclass(frozen=True)
class FramePlanes:
    """One 4:2:0 frame; ``y`` is ``(H, W)``, ``u`` and ``v`` are ``(H/2, W/2)``, all uint8."""

    y: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        h, w = self.y.shape
        check_dimensions(w, h)
        for name in ("u", "v"):
            plane = getattr(self, name)
            if plane.shape != (h // 2, w // 2):
                raise ValueError(f"{name} plane is {plane.shape}, expected {(h // 2, w // 2)}")
        for name in ("y", "u", "v"):
            if getattr(self, name).dtype != np.uint8:
                raise TypeError(f"{name} plane must be uint8")

    @property
    def width(self) -> int:
        return self.y.shape[1]

    @property
    def height(self) -> int:
        return self.y.shape[0]

    def with_luma(self, y: np.ndarray) -> "FramePlanes":
        return FramePlanes(y, self.u, self.v)

    @classmethod
    def gray(cls, width: int = QCIF_WIDTH, height: int = QCIF_HEIGHT, level: int = 128) -> "FramePlanes":
        return cls(
            np.full((height, width), level, np.uint8),
            np.full((height // 2, width // 2), 128, np.uint8),
            np.full((height // 2, width // 2), 128, np.uint8),
        )


@dataclass(frozen=True)
class Clip:
    frames: tuple[FramePlanes, ...]
    frame_rate: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if not self.frames:
            raise ValueError("a clip needs at least one frame")
        shape = self.frames[0].y.shape
        if any(f.y.shape != shape for f in self.frames):
            raise ValueError("all frames of a clip must share dimensions")

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, index):
        return self.frames[index]

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    def luma(self) -> np.ndarray:
        """All luma planes stacked as ``(T, H, W)`` uint8."""
        return np.stack([f.y for f in self.frames])

    def replace(self, frames: Sequence[FramePlanes]) -> "Clip":
        return Clip(tuple(frames), self.frame_rate)


@dataclass(frozen=True)
class BlockGrid:
    blocks_per_row: int
    blocks_per_col: int

    @classmethod
    def for_frame(cls, width: int, height: int) -> "BlockGrid":
        return cls(width // BLOCK, height // BLOCK)

    @property
    def total(self) -> int:
        return self.blocks_per_row * self.blocks_per_col

    def position(self, index: int) -> tuple[int, int]:
        """Top-left pixel (row, col) of block ``index`` in raster order."""
        r, c = divmod(index, self.blocks_per_row)
        return r * BLOCK, c * BLOCK


def check_dimensions(width: int, height: int) -> None:
    if width <= 0 or height <= 0 or width % 16 or height % 16:
        raise ValueError(f"frame size {width}x{height} must be positive multiples of 16")


def frame_bytes(width: int, height: int) -> int:
    return width * height * 3 // 2


def read_yuv420(source, width: int = QCIF_WIDTH, height: int = QCIF_HEIGHT, frame_rate: float = 30.0) -> Clip:
    """Parse planar I420 from a path, bytes, or binary stream."""
    check_dimensions(width, height)
    if isinstance(source, (bytes, bytearray, memoryview)):
        data = bytes(source)
    elif isinstance(source, (str, os.PathLike)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    size = frame_bytes(width, height)
    if len(data) == 0 or len(data) % size:
        raise ValueError(
            f"stream of {len(data)} bytes is not a positive multiple of the "
            f"{width}x{height} I420 frame size ({size} bytes)"
        )
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, size)
    ys, cs = width * height, (width // 2) * (height // 2)
    frames = [
        FramePlanes(
            f[:ys].reshape(height, width).copy(),
            f[ys : ys + cs].reshape(height // 2, width // 2).copy(),
            f[ys + cs :].reshape(height // 2, width // 2).copy(),
        )
        for f in raw
    ]
    return Clip(tuple(frames), frame_rate)


def write_yuv420(clip: Clip, dest: str | os.PathLike | BinaryIO | None = None) -> bytes:
    """Serialize a clip as I420; also writes it to ``dest`` when given."""
    buf = io.BytesIO()
    for f in clip:
        buf.write(f.y.tobytes())
        buf.write(f.u.tobytes())
        buf.write(f.v.tobytes())
    data = buf.getvalue()
    if isinstance(dest, (str, os.PathLike)):
        Path(dest).write_bytes(data)
    elif dest is not None:
        dest.write(data)
    return data


def write_pgm(path, plane: np.ndarray) -> None:
    plane = np.asarray(plane, dtype=np.uint8)
    h, w = plane.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode() + plane.tobytes())


def round_clamp(x: np.ndarray) -> np.ndarray:
    """Round half up and clamp to uint8."""
    return np.clip(np.floor(np.asarray(x, dtype=np.float64) + 0.5), 0, 255).astype(np.uint8)


# BT.601 full range
_RGB_TO_YUV = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ]
)
_YUV_TO_RGB = np.array(
    [
        [1.0, 0.0, 1.402],
        [1.0, -0.344136, -0.714136],
        [1.0, 1.772, 0.0],
    ]
)


def rgb_to_yuv(rgb: np.ndarray) -> FramePlanes:
    """Packed ``(H, W, 3)`` RGB to 4:2:0 planes; chroma is 2x2 box averaged."""
    rgb = np.asarray(rgb, dtype=np.float64)
    h, w, _ = rgb.shape
    yuv = rgb @ _RGB_TO_YUV.T
    yuv[..., 1:] += 128.0
    chroma = yuv[..., 1:].reshape(h // 2, 2, w // 2, 2, 2).mean(axis=(1, 3))
    return FramePlanes(round_clamp(yuv[..., 0]), round_clamp(chroma[..., 0]), round_clamp(chroma[..., 1]))


def upsample_chroma(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    return cv2.resize(plane.astype(np.float32), (2 * w, 2 * h), interpolation=cv2.INTER_LINEAR).astype(np.float64)


def yuv_to_rgb(frame: FramePlanes) -> np.ndarray:
    """4:2:0 planes to packed uint8 RGB with bilinear chroma upsampling."""
    yuv = np.stack(
        [frame.y.astype(np.float64), upsample_chroma(frame.u) - 128.0, upsample_chroma(frame.v) - 128.0],
        axis=-1,
    )
    return round_clamp(yuv @ _YUV_TO_RGB.T)


def tile_blocks(plane: np.ndarray) -> np.ndarray:
    """Split a plane into ``(n, 8, 8)`` blocks in raster order."""
    plane = np.asarray(plane)
    h, w = plane.shape
    if h % BLOCK or w % BLOCK:
        raise ValueError(f"plane {w}x{h} is not divisible into 8x8 blocks")
    return plane.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK).swapaxes(1, 2).reshape(-1, BLOCK, BLOCK)


def untile_blocks(blocks: np.ndarray, width: int, height: int) -> np.ndarray:
    blocks = np.asarray(blocks)
    rows, cols = height // BLOCK, width // BLOCK
    if blocks.shape != (rows * cols, BLOCK, BLOCK):
        raise ValueError(f"expected {rows * cols} blocks for a {width}x{height} plane, got {blocks.shape}")
    return blocks.reshape(rows, cols, BLOCK, BLOCK).swapaxes(1, 2).reshape(height, width)


def luma_histogram(y: np.ndarray) -> np.ndarray:
    return np.bincount((np.asarray(y, dtype=np.uint8) >> 2).ravel(), minlength=HIST_BINS)


def scene_distance(a: np.ndarray, b: np.ndarray, smoothing: float = HIST_SMOOTHING) -> float:
    """Normalized L1 distance between the (bin-smoothed) 64-bin histograms of two luma planes."""
    ha, hb = (luma_histogram(y).astype(np.float64) for y in (a, b))
    if smoothing > 0:
        ha = ndimage.gaussian_filter1d(ha, smoothing, mode="reflect")
        hb = ndimage.gaussian_filter1d(hb, smoothing, mode="reflect")
    return float(np.abs(ha - hb).sum() / np.asarray(a).size)


def detect_scenes(
    clip: Clip, threshold: float = DEFAULT_SCENE_THRESHOLD, smoothing: float = HIST_SMOOTHING
) -> list[tuple[int, int]]:
    """Half-open ``(start, end)`` scenes, split where :func:`scene_distance`
    between consecutive frames exceeds ``threshold``."""
    cuts = [
        t + 1
        for t in range(len(clip) - 1)
        if scene_distance(clip[t].y, clip[t + 1].y, smoothing) > threshold
    ]
    bounds = [0, *cuts, len(clip)]
    return list(zip(bounds[:-1], bounds[1:]))
