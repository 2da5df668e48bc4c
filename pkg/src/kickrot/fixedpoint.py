"""Signed fixed-point numbers used by the ancilla registers.

A register of precision ``p`` holds ``p + 2`` bits in two's complement:
two integer bits (sign included) and ``p`` fractional bits, so the
representable range is ``[-2, 2)`` with resolution ``2**-p``.

Mantissas are plain Python ints (scalars) or numpy integer arrays. When the
products of two mantissas could overflow int64 the array helpers fall back
to ``dtype=object`` so arbitrary precision is kept.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

INTEGER_BITS = 2


def width(p: int) -> int:
    """Total number of qubits in a register of precision ``p``."""
    return p + INTEGER_BITS


def mantissa_dtype(p: int):
    # products of two (p+2)-bit mantissas plus a few guard bits must fit
    return np.int64 if 2 * width(p) + 2 < 63 else object


def round_shift(x, s: int):
    """Divide ``x`` by ``2**s`` rounding to nearest, ties to even.

    Works for Python ints and for integer / object numpy arrays.
    """
    if s <= 0:
        return x << -s if s < 0 else x
    q = x >> s
    r = x - (q << s)
    half = 1 << (s - 1)
    if isinstance(x, np.ndarray):
        up = (r > half) | ((r == half) & ((q & 1) == 1))
        return q + up.astype(q.dtype if q.dtype != object else np.int64)
    return q + (1 if r > half or (r == half and q & 1) else 0)


def from_real(x: float, p: int) -> int:
    """Mantissa nearest to ``x`` (ties to even)."""
    # scaling by a power of two is exact, Python's round() is ties-to-even
    return int(round(float(x) * (1 << p)))


def in_range(m, p: int) -> bool:
    lo, hi = -(1 << (p + 1)), 1 << (p + 1)
    if isinstance(m, np.ndarray):
        return bool(np.all((m >= lo) & (m < hi))) if m.size else True
    return lo <= m < hi


def to_bits(m, p: int):
    """Two's-complement bit pattern (non-negative) of a mantissa."""
    return m & ((1 << width(p)) - 1)


def from_bits(raw, p: int):
    """Inverse of :func:`to_bits`."""
    w = width(p)
    sign = 1 << (w - 1)
    return (raw ^ sign) - sign


def bit_weights(p: int) -> list[float]:
    """Real value contributed by each register qubit when set.

    Qubit ``b < p`` is a fractional bit of weight ``2**(b - p)``, qubit ``p``
    the unit bit and qubit ``p + 1`` the sign bit with weight ``-2``.
    """
    return [2.0 ** (b - p) for b in range(p)] + [1.0, -2.0]


@dataclass(frozen=True)
class FixedPoint:
    """A single fixed-point value with ``p`` fractional bits."""

    mantissa: int
    p: int

    def __post_init__(self):
        if not in_range(self.mantissa, self.p):
            raise OverflowError(f"mantissa {self.mantissa} outside [-2, 2) at p={self.p}")

    @classmethod
    def from_real(cls, x: float, p: int) -> "FixedPoint":
        return cls(from_real(x, p), p)

    @property
    def value(self) -> float:
        return self.mantissa / (1 << self.p)

    def __float__(self) -> float:
        return self.value

    @property
    def bits(self) -> int:
        return to_bits(self.mantissa, self.p)
