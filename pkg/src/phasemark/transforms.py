"""8x8 block transforms: 2D DFT and 2D sequency-ordered complex Hadamard (SCHT).

Both transforms run through radix-2 butterfly networks that work on a whole
stack of blocks at once (arrays shaped ``(..., 8, 8)``). The SCHT network only
needs additions and multiplications by ``+-i``; the DFT network additionally
multiplies by the two non-trivial eighth roots of unity. Every fast path can
be instrumented with an :class:`OpCounter`.

Conventions:

* ``dft2_forward`` is unnormalized, ``dft2_inverse`` carries the ``1/64``.
* ``scht2_forward`` computes ``C X C^T`` with ``C = conj(H) / sqrt(8)``, which
  is unitary, so ``scht2_inverse`` computes ``C^H S conj(C)``.
* Phases live in ``(-pi, pi]`` and the phase of an exact zero is 0.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

N = 8
DFT = "dft"
SCHT = "scht"
KINDS = (DFT, SCHT)

_i = 1j
SCHT_KERNEL = np.array(
    [
        [1, 1, 1, 1, 1, 1, 1, 1],
        [1, 1, _i, _i, -1, -1, -_i, -_i],
        [1, _i, -1, -_i, 1, _i, -1, -_i],
        [1, _i, -_i, 1, -1, -_i, _i, -1],
        [1, -1, 1, -1, 1, -1, 1, -1],
        [1, -1, _i, -_i, -1, 1, -_i, _i],
        [1, -_i, -1, _i, 1, -_i, -1, _i],
        [1, -_i, -_i, -1, -1, _i, _i, 1],
    ],
    dtype=np.complex128,
)
SCHT_KERNEL.setflags(write=False)

#: Normalized forward matrix ``C = conj(H) / sqrt(8)``.
SCHT_MATRIX = np.conj(SCHT_KERNEL) / np.sqrt(N)
SCHT_MATRIX.setflags(write=False)

SYMMETRY_TOLERANCE = 1e-6

# DIF networks emit outputs in bit-reversed order.
_BITREV = np.array([0, 4, 2, 6, 1, 5, 3, 7])
_W8 = np.exp(-2j * np.pi * np.arange(4) / 8)
_W8.setflags(write=False)


class SymmetryWarning(RuntimeWarning):
    """Inverse DFT input was not conjugate symmetric; imaginary part dropped."""


@dataclass
class OpCounter:
    """Complex operation tally for one transform call.

    Multiplications by ``+-1`` and ``+-i`` are free (sign flips and real/imag
    swaps) and are not counted, and neither is the final normalization scale.
    """

    complex_adds: int = 0
    complex_mults: int = 0

    @property
    def total(self) -> int:
        return self.complex_adds + self.complex_mults


def phase(z) -> np.ndarray:
    """Angle of ``z`` in ``(-pi, pi]``; zero-magnitude entries map to 0."""
    z = np.asarray(z)
    ang = np.angle(z)
    ang = np.where(ang <= -np.pi, np.pi, ang)
    return np.where(np.abs(z) == 0, 0.0, ang)


def _times_j(z: np.ndarray, sign: int) -> np.ndarray:
    # multiply by sign*i without a complex multiply
    out = np.empty_like(z)
    if sign > 0:
        out.real = -z.imag
        out.imag = z.real
    else:
        out.real = z.imag
        out.imag = -z.real
    return out


def _count(counter: OpCounter | None, adds: int = 0, mults: int = 0) -> None:
    if counter is not None:
        counter.complex_adds += adds
        counter.complex_mults += mults


def _dft8(x: np.ndarray, sign: int, counter: OpCounter | None) -> np.ndarray:
    """8-point DFT along the last axis; ``sign=-1`` forward, ``+1`` inverse."""
    vectors = x.size // N
    tw = _W8 if sign < 0 else np.conj(_W8)
    a = x[..., :4] + x[..., 4:]
    b = (x[..., :4] - x[..., 4:]) * tw
    _count(counter, adds=8 * vectors, mults=2 * vectors)

    a2 = a[..., :2] + a[..., 2:]
    aq = a[..., :2] - a[..., 2:]
    aq[..., 1] = _times_j(aq[..., 1], sign)
    b2 = b[..., :2] + b[..., 2:]
    bq = b[..., :2] - b[..., 2:]
    bq[..., 1] = _times_j(bq[..., 1], sign)
    _count(counter, adds=8 * vectors)

    out = np.empty(x.shape, dtype=np.complex128)
    out[..., 0] = a2[..., 0] + a2[..., 1]
    out[..., 1] = a2[..., 0] - a2[..., 1]
    out[..., 2] = aq[..., 0] + aq[..., 1]
    out[..., 3] = aq[..., 0] - aq[..., 1]
    out[..., 4] = b2[..., 0] + b2[..., 1]
    out[..., 5] = b2[..., 0] - b2[..., 1]
    out[..., 6] = bq[..., 0] + bq[..., 1]
    out[..., 7] = bq[..., 0] - bq[..., 1]
    _count(counter, adds=8 * vectors)
    return out[..., _BITREV]


def _hadamard8(x: np.ndarray, sign: int, counter: OpCounter | None) -> np.ndarray:
    """Multiply the last axis by ``H`` (``sign=+1``) or ``conj(H)`` (``sign=-1``)."""
    vectors = x.size // N
    a = x[..., :4] + x[..., 4:]
    b = x[..., :4] - x[..., 4:]
    _count(counter, adds=8 * vectors)

    p = a[..., :2] + a[..., 2:]
    q = a[..., :2] - a[..., 2:]
    jb = _times_j(b[..., 2:], sign)
    c = b[..., :2] + jb
    d = b[..., :2] - jb
    _count(counter, adds=8 * vectors)

    out = np.empty(x.shape, dtype=np.complex128)
    jq = _times_j(q[..., 1], sign)
    jd = _times_j(d[..., 1], sign)
    out[..., 0] = p[..., 0] + p[..., 1]
    out[..., 4] = p[..., 0] - p[..., 1]
    out[..., 2] = q[..., 0] + jq
    out[..., 6] = q[..., 0] - jq
    out[..., 1] = c[..., 0] + c[..., 1]
    out[..., 5] = c[..., 0] - c[..., 1]
    out[..., 3] = d[..., 0] + jd
    out[..., 7] = d[..., 0] - jd
    _count(counter, adds=8 * vectors)
    return out


def _separable(x: np.ndarray, op, sign: int, counter: OpCounter | None) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[-2:] != (N, N):
        raise ValueError(f"expected trailing shape (8, 8), got {x.shape}")
    cols = op(np.swapaxes(x, -1, -2), sign, counter)
    return op(np.swapaxes(cols, -1, -2), sign, counter)


def dft2_forward(block, counter: OpCounter | None = None) -> np.ndarray:
    """Unnormalized 2D DFT of one ``(8, 8)`` block or a stack of blocks."""
    return _separable(block, _dft8, -1, counter)


def dft2_inverse(coeffs, counter: OpCounter | None = None, return_residue: bool = False):
    """Inverse 2D DFT (with the 1/64 factor), real part only.

    Emits :class:`SymmetryWarning` when the discarded imaginary part reaches
    ``1e-6``, i.e. the input was not conjugate symmetric.
    """
    x = _separable(coeffs, _dft8, +1, counter) / (N * N)
    residue = float(np.max(np.abs(x.imag))) if x.size else 0.0
    if residue >= SYMMETRY_TOLERANCE:
        warnings.warn(
            f"inverse DFT imaginary residue {residue:.3g} (input not conjugate symmetric)",
            SymmetryWarning,
            stacklevel=2,
        )
    if return_residue:
        return x.real.copy(), residue
    return x.real.copy()


def conjugate_partner(u: int, v: int) -> tuple[int, int]:
    return (-u) % N, (-v) % N


def enforce_conjugate_symmetry(coeffs, anchor: tuple[int, int] = (1, 1)) -> np.ndarray:
    """Copy ``conj(coeffs[anchor])`` into the anchor's mirror bin.

    Works on a single block or a stack. Self-conjugate anchors such as (0, 0)
    or (4, 4) cannot carry an arbitrary phase on a real signal and are rejected.
    """
    u, v = anchor
    pu, pv = conjugate_partner(u, v)
    if (pu, pv) == (u, v):
        raise ValueError(f"anchor {anchor} is self-conjugate")
    out = np.array(coeffs, dtype=np.complex128, copy=True)
    out[..., pu, pv] = np.conj(out[..., u, v])
    return out


def scht2_forward(block, counter: OpCounter | None = None) -> np.ndarray:
    """2D SCHT ``S = C X C^T`` of one block or a stack of blocks."""
    return _separable(block, _hadamard8, -1, counter) / N


def scht2_inverse(coeffs, counter: OpCounter | None = None, return_residue: bool = False):
    """Inverse 2D SCHT ``X = C^H S conj(C)``; real part kept.

    A phase edit on a single coefficient leaves an imaginary residue, which is
    logged and, with ``return_residue``, returned alongside the pixels.
    """
    # H is symmetric, so C^H = H / sqrt(8) on both sides
    x = _separable(coeffs, _hadamard8, +1, counter) / N
    residue = float(np.max(np.abs(x.imag))) if x.size else 0.0
    if residue >= SYMMETRY_TOLERANCE:
        logger.debug("SCHT inverse discarded imaginary residue %.3g", residue)
    if return_residue:
        return x.real.copy(), residue
    return x.real.copy()


def forward(kind: str, blocks, counter: OpCounter | None = None) -> np.ndarray:
    if kind == DFT:
        return dft2_forward(blocks, counter)
    if kind == SCHT:
        return scht2_forward(blocks, counter)
    raise ValueError(f"unknown transform kind {kind!r}")


def inverse(kind: str, coeffs, counter: OpCounter | None = None) -> np.ndarray:
    if kind == DFT:
        return dft2_inverse(coeffs, counter)
    if kind == SCHT:
        return scht2_inverse(coeffs, counter)
    raise ValueError(f"unknown transform kind {kind!r}")


def _dense_matmul(a: np.ndarray, b: np.ndarray, counter: OpCounter) -> np.ndarray:
    out = np.zeros((N, N), dtype=np.complex128)
    for r in range(N):
        for c in range(N):
            acc = a[r, 0] * b[0, c]
            for k in range(1, N):
                acc = acc + a[r, k] * b[k, c]
            out[r, c] = acc
    counter.complex_mults += N**3
    counter.complex_adds += N * N * (N - 1)
    return out


def count_ops(kind: str, fast: bool = True) -> OpCounter:
    """Complex add/mult counts for one forward 8x8 2D transform.

    ``fast=True`` instruments the butterfly network; ``fast=False`` counts a
    dense ``M X M^T`` evaluation (two full matrix products).
    """
    counter = OpCounter()
    block = np.zeros((N, N))
    if fast:
        forward(kind, block, counter)
        return counter
    if kind == DFT:
        m = np.exp(-2j * np.pi * np.outer(np.arange(N), np.arange(N)) / N)
    elif kind == SCHT:
        m = np.asarray(SCHT_MATRIX)
    else:
        raise ValueError(f"unknown transform kind {kind!r}")
    _dense_matmul(_dense_matmul(m, block.astype(np.complex128), counter), m.T, counter)
    return counter
