"""Blind video watermarking by BPSK phase modulation of 8x8 block transforms."""

from .attacks import ATTACKS, AttackSpec
from .embed import EmbedConfig, PayloadLayout, embed_clip, embed_frame
from .extract import Extraction, extract_clip, extract_frame
from .metrics import RunReport, bit_errors, normalized_correlation, psnr
from .payload import KeySet, decode_chips, encode_logo, load_logo, read_pbm, write_pbm
from .transforms import DFT, SCHT
from .video import Clip, FramePlanes, detect_scenes, read_yuv420, write_yuv420

__version__ = "0.1.0"

__all__ = [
    "ATTACKS",
    "AttackSpec",
    "Clip",
    "DFT",
    "EmbedConfig",
    "Extraction",
    "FramePlanes",
    "KeySet",
    "PayloadLayout",
    "RunReport",
    "SCHT",
    "bit_errors",
    "decode_chips",
    "detect_scenes",
    "embed_clip",
    "embed_frame",
    "encode_logo",
    "extract_clip",
    "extract_frame",
    "load_logo",
    "normalized_correlation",
    "psnr",
    "read_pbm",
    "read_yuv420",
    "write_pbm",
    "write_yuv420",
]
