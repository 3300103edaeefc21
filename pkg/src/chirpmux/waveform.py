"""Chirp-basis multicarrier waveform: parameters, transforms, prefix handling.

The forward transform generalizes the unitary DFT with two quadratic-phase
(chirp) stages applied around it:

    daft(x)[m] = lam2[m] * sum_k F[m, k] * lam1[k] * x[k]

where F is the unitary DFT matrix and lam_c[k] = exp(-i 2 pi c k^2). Rate c1
multiplies the time-domain samples, so it alone decides how delay and Doppler
combine into displacement after equalization; rate c2 only rotates symbol
phases. (c1, c2) = (0, 0) reduces to plain OFDM, and c1 = c2 = 1/(2n) gives
the Fresnel spreading basis used by OCDM.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class WaveformMode(enum.Enum):
    OFDM = "ofdm"
    OCDM = "ocdm"
    AFDM = "afdm"


@dataclass(frozen=True)
class WaveformParams:
    """Block length, chirp rates, and prefix length for one frame.

    Attributes:
        n: number of symbol slots per frame, at least 2.
        c1: time-side chirp rate, non-negative.
        c2: symbol-side chirp rate, non-negative.
        cpp_len: chirp-periodic prefix length, in [0, n).
    """

    n: int
    c1: float
    c2: float = 0.0
    cpp_len: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool) or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if self.c1 < 0.0 or self.c2 < 0.0:
            raise ValueError(f"chirp rates must be non-negative, got c1={self.c1}, c2={self.c2}")
        if not isinstance(self.cpp_len, (int, np.integer)) or isinstance(self.cpp_len, bool):
            raise ValueError(f"cpp_len must be an integer, got {self.cpp_len!r}")
        if not 0 <= self.cpp_len < self.n:
            raise ValueError(f"cpp_len must satisfy 0 <= cpp_len < n, got cpp_len={self.cpp_len}")

    @property
    def mode(self) -> WaveformMode:
        """Classify the rate pair: (0, 0) is OFDM, (1/2n, 1/2n) is OCDM, else AFDM."""
        fresnel = 1.0 / (2.0 * self.n)
        if self.c1 == 0.0 and self.c2 == 0.0:
            return WaveformMode.OFDM
        if math.isclose(self.c1, fresnel, rel_tol=1e-12, abs_tol=0.0) and math.isclose(
            self.c2, fresnel, rel_tol=1e-12, abs_tol=0.0
        ):
            return WaveformMode.OCDM
        return WaveformMode.AFDM


def chirp_phase_vector(n: int, c: float) -> np.ndarray:
    """Quadratic-phase vector exp(-i 2 pi c k^2) for k = 0 .. n-1."""
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ValueError(f"length must be a positive integer, got {n!r}")
    k = np.arange(n, dtype=np.float64)
    return np.exp(-2j * np.pi * c * k * k)


def _check_length(x: np.ndarray, expected: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or x.shape[0] != expected:
        raise ValueError(f"{what} must be a length-{expected} vector, got shape {x.shape}")
    return x


def daft(x: np.ndarray, p: WaveformParams) -> np.ndarray:
    """Forward transform: chirp(c1) multiply, unitary FFT, chirp(c2) multiply.

    Maps a time-domain frame to the affine-frequency domain. Unitary, so
    idaft composed with daft is the identity.
    """
    x = _check_length(x, p.n, "input")
    lam1 = chirp_phase_vector(p.n, p.c1)
    lam2 = chirp_phase_vector(p.n, p.c2)
    return lam2 * (np.fft.fft(lam1 * x) / math.sqrt(p.n))


def idaft(x: np.ndarray, p: WaveformParams) -> np.ndarray:
    """Inverse transform, the exact adjoint of daft.

    Conjugate chirp(c2) multiply, unitary IFFT, conjugate chirp(c1) multiply;
    the time samples leave through the c1 stage.
    """
    x = _check_length(x, p.n, "input")
    lam1 = chirp_phase_vector(p.n, p.c1)
    lam2 = chirp_phase_vector(p.n, p.c2)
    return lam1.conj() * (np.fft.ifft(lam2.conj() * x) * math.sqrt(p.n))


def transform_matrix(p: WaveformParams) -> np.ndarray:
    """Dense n-by-n matrix of daft. Every entry has magnitude 1/sqrt(n)."""
    n = p.n
    grid = np.arange(n)
    f = np.exp(-2j * np.pi * np.outer(grid, grid) / n) / math.sqrt(n)
    lam1 = chirp_phase_vector(n, p.c1)
    lam2 = chirp_phase_vector(n, p.c2)
    return lam2[:, None] * f * lam1[None, :]


def add_cpp(s: np.ndarray, p: WaveformParams) -> np.ndarray:
    """Prepend the chirp-periodic prefix to a time-domain frame.

    Prefix slot k carries the payload tail sample s[n + n'] with n' = k - cpp_len,
    rotated by exp(-i 2 pi c1 (n^2 + 2 n n')). That rotation is exactly the phase
    a c1-rate chirp accumulates across one period, so a delayed frame wraps with
    no discontinuity in the chirp basis. With c1 = 0 the prefix is a plain cyclic
    prefix, copied bit for bit.
    """
    s = _check_length(s, p.n, "frame")
    length = p.cpp_len
    if length == 0:
        return s.copy()
    tail = s[p.n - length :]
    if p.c1 == 0.0:
        prefix = tail.copy()
    else:
        n_prime = np.arange(-length, 0, dtype=np.float64)
        prefix = tail * np.exp(-2j * np.pi * p.c1 * (p.n * p.n + 2.0 * p.n * n_prime))
    return np.concatenate([prefix, s])


def strip_cpp(r: np.ndarray, p: WaveformParams) -> np.ndarray:
    """Drop the prefix, returning the n payload samples."""
    r = _check_length(r, p.n + p.cpp_len, "prefixed frame")
    return r[p.cpp_len :].copy()


@dataclass(frozen=True)
class FrameLayout:
    """Partition of the n symbol slots into pilot, guard, and data index sets."""

    n: int
    pilot: tuple[int, ...]
    guard: tuple[int, ...]
    data: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.pilot) > 1:
            raise ValueError("at most one pilot slot is supported")
        combined = sorted(list(self.pilot) + list(self.guard) + list(self.data))
        if combined != list(range(self.n)):
            raise ValueError("pilot, guard, and data sets must partition range(n) exactly")

    @classmethod
    def all_data(cls, n: int) -> "FrameLayout":
        return cls(n=n, pilot=(), guard=(), data=tuple(range(n)))

    @classmethod
    def single_pilot(cls, n: int, guard_width: int) -> "FrameLayout":
        """Pilot slot 0 with guard_width zeroed slots on each cyclic side."""
        if guard_width < 0:
            raise ValueError(f"guard_width must be non-negative, got {guard_width}")
        if 2 * guard_width + 1 > n:
            raise ValueError(f"guard_width {guard_width} leaves no room in a frame of {n} slots")
        guard = sorted({off % n for off in range(1, guard_width + 1)}
                       | {(-off) % n for off in range(1, guard_width + 1)})
        occupied = {0} | set(guard)
        data = tuple(i for i in range(n) if i not in occupied)
        return cls(n=n, pilot=(0,), guard=tuple(guard), data=data)


@dataclass
class Frame:
    """Affine-domain symbols occupying one frame, plus the slot layout."""

    symbols: np.ndarray
    layout: FrameLayout

    def __post_init__(self) -> None:
        self.symbols = np.asarray(self.symbols, dtype=np.complex128)
        if self.symbols.shape != (self.layout.n,):
            raise ValueError(
                f"symbols must have length {self.layout.n}, got shape {self.symbols.shape}"
            )
