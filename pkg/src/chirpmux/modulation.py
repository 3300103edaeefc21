"""Gray-coded unit-energy constellations and hard-decision demapping."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Per-axis Gray code for the 16QAM amplitude levels {-3, -1, +1, +3}.
_GRAY2_TO_LEVEL = {(0, 0): -3.0, (0, 1): -1.0, (1, 1): 1.0, (1, 0): 3.0}


@dataclass(frozen=True)
class Constellation:
    """Constellation points indexed by the integer value of their bit label."""

    name: str
    points: np.ndarray
    bits_per_symbol: int

    @classmethod
    def qpsk(cls) -> "Constellation":
        """Gray QPSK: bit b0 selects the real sign, b1 the imaginary sign."""
        pts = np.empty(4, dtype=np.complex128)
        for b0 in (0, 1):
            for b1 in (0, 1):
                pts[(b0 << 1) | b1] = ((1 - 2 * b0) + 1j * (1 - 2 * b1)) / math.sqrt(2.0)
        return cls(name="qpsk", points=pts, bits_per_symbol=2)

    @classmethod
    def qam16(cls) -> "Constellation":
        """Gray 16QAM: bits (b0, b1) set the real level, (b2, b3) the imaginary."""
        pts = np.empty(16, dtype=np.complex128)
        for label in range(16):
            b = [(label >> shift) & 1 for shift in (3, 2, 1, 0)]
            re = _GRAY2_TO_LEVEL[(b[0], b[1])]
            im = _GRAY2_TO_LEVEL[(b[2], b[3])]
            pts[label] = (re + 1j * im) / math.sqrt(10.0)
        return cls(name="16qam", points=pts, bits_per_symbol=4)

    @classmethod
    def by_name(cls, name: str) -> "Constellation":
        normalized = name.strip().lower()
        if normalized == "qpsk":
            return cls.qpsk()
        if normalized in ("16qam", "qam16"):
            return cls.qam16()
        raise ValueError(f"unknown constellation {name!r}; expected 'qpsk' or '16qam'")


def map_bits(bits: np.ndarray, c: Constellation) -> np.ndarray:
    """Pack bits into symbols, most significant bit first within each group."""
    bits = np.asarray(bits)
    if bits.ndim != 1:
        raise ValueError(f"bits must be a flat vector, got shape {bits.shape}")
    if not np.isin(bits, (0, 1)).all():
        raise ValueError("bits must contain only 0 and 1")
    k = c.bits_per_symbol
    if bits.size % k != 0:
        raise ValueError(f"bit count {bits.size} is not a multiple of {k}")
    groups = bits.reshape(-1, k).astype(np.int64)
    weights = 1 << np.arange(k - 1, -1, -1)
    labels = groups @ weights
    return c.points[labels]


def demap_symbols(symbols: np.ndarray, c: Constellation) -> np.ndarray:
    """Hard minimum-distance decisions back to bits.

    Distance ties resolve to the lowest point index, so the output is a pure
    function of the input.
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.ndim != 1:
        raise ValueError(f"symbols must be a flat vector, got shape {symbols.shape}")
    dists = np.abs(symbols[:, None] - c.points[None, :])
    labels = np.argmin(dists, axis=1)
    k = c.bits_per_symbol
    shifts = np.arange(k - 1, -1, -1)
    return ((labels[:, None] >> shifts[None, :]) & 1).reshape(-1).astype(np.uint8)
