"""Waveform analysis: spectral displacement tracking, sparsity metrics, and
matched-filter range-Doppler sensing.

A subcarrier of chirp rate c sweeps 2nc frequency bins per sample, so a
cyclic delay of l samples lowers its start frequency by (2nc) l bins while a
Doppler of f raises it by f bins. The measured displacement of the short-time
spectrum therefore equals f - (2nc) l, the same law that fixes the effective
matrix geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResolutionError, UnsupportedRegimeError
from .link import EffectiveChannel, path_displacement
from .waveform import WaveformParams


@dataclass(frozen=True)
class SpectrogramSpec:
    """Short-time analysis geometry: window and FFT lengths in samples."""

    window_len: int
    hop: int
    fft_len: int

    def __post_init__(self) -> None:
        if self.window_len < 4:
            raise ValueError(f"window_len must be at least 4, got {self.window_len}")
        if self.hop < 1:
            raise ValueError(f"hop must be positive, got {self.hop}")
        if self.fft_len < self.window_len:
            raise ValueError(
                f"fft_len {self.fft_len} must be at least window_len {self.window_len}"
            )

    @classmethod
    def for_block(cls, n: int) -> "SpectrogramSpec":
        """Defaults that keep a full-band chirp sweep well inside one window
        and the FFT grid finer than one frame bin."""
        window = max(8, n // 16)
        return cls(window_len=window, hop=max(1, window // 2), fft_len=8 * n)


def _window_peak_bins(signal: np.ndarray, start: int, n: int, spec: SpectrogramSpec) -> float:
    """Interpolated argmax frequency of one windowed segment, in frame bins."""
    segment = signal[start : start + spec.window_len]
    window = np.hanning(spec.window_len)
    mag = np.abs(np.fft.fft(segment * window, spec.fft_len))
    k = int(np.argmax(mag))
    left = mag[(k - 1) % spec.fft_len]
    right = mag[(k + 1) % spec.fft_len]
    center = mag[k]
    denom = left - 2.0 * center + right
    offset = 0.0 if denom == 0.0 else 0.5 * (left - right) / denom
    return (k + offset) * n / spec.fft_len


def measure_start_frequency_shift(
    chirp_rate: float,
    delay: int,
    doppler: float,
    n: int,
    spec: SpectrogramSpec,
) -> float:
    """Displacement of a chirp's short-time spectrum under delay and Doppler.

    Builds the unit chirp exp(i 2 pi c k^2), applies a cyclic delay and a
    Doppler phasor, and compares interpolated spectral peaks of the two
    signals at the earliest window free of wrap contamination. Returns the
    shift in frame bins, wrapped to [-n/2, n/2); it equals
    doppler - (2 n chirp_rate) delay for grid offsets.
    """
    if not isinstance(delay, (int, np.integer)) or isinstance(delay, bool) or delay < 0:
        raise ValueError(f"delay must be a non-negative integer, got {delay!r}")
    if chirp_rate < 0.0:
        raise ValueError(f"chirp_rate must be non-negative, got {chirp_rate}")
    if spec.window_len > n // 4:
        raise ValueError(
            f"window_len {spec.window_len} exceeds n/4 = {n // 4}; the measurement "
            "needs headroom for the delayed window"
        )
    expected = doppler - 2.0 * n * chirp_rate * delay
    # IEEE remainder is exact, so small shifts survive the wrap without the
    # round-off that (x + n/2) % n - n/2 would introduce.
    expected_wrapped = math.remainder(expected, n)
    if expected_wrapped == n / 2:
        expected_wrapped = -n / 2
    grid = n / spec.fft_len
    if 0.0 < abs(expected_wrapped) < grid:
        needed = math.ceil(n / abs(expected_wrapped))
        raise ResolutionError(
            f"expected shift {expected_wrapped:.4g} bins is below the grid step "
            f"{grid:.4g}; use window/fft length of at least {needed}",
            required_window_len=needed,
        )
    k = np.arange(n, dtype=np.float64)
    reference = np.exp(2j * np.pi * chirp_rate * k * k)
    perturbed = np.exp(2j * np.pi * doppler * k / n) * np.roll(reference, delay)
    start = delay  # earliest window whose samples all postdate the cyclic wrap
    if start + spec.window_len > n:
        raise ValueError("delay leaves no room for one analysis window")
    peak_ref = _window_peak_bins(reference, start, n, spec)
    peak_pert = _window_peak_bins(perturbed, start, n, spec)
    shift = peak_pert - peak_ref
    return float((shift + n / 2) % n - n / 2)


def sparsity_metrics(h: EffectiveChannel, rel_threshold: float = 0.01) -> dict:
    """Occupancy statistics of an effective matrix.

    significant_fraction counts entries above rel_threshold * max |entry|,
    as a fraction of n^2. per_path_separation is true when the significant
    entries sit exactly on the displacement diagonals of the source paths,
    one distinct diagonal per path; fractional Doppler or an off-grid chirp
    rate forfeits it. max_offdiag_leakage is the largest significant
    magnitude outside the predicted diagonals, normalized by max |entry|.
    """
    if not 0.0 < rel_threshold < 1.0:
        raise ValueError(f"rel_threshold must lie in (0, 1), got {rel_threshold}")
    n = h.params.n
    mag = np.abs(h.matrix)
    peak = mag.max()
    if peak == 0.0:
        return {
            "significant_fraction": 0.0,
            "per_path_separation": False,
            "max_offdiag_leakage": 0.0,
        }
    significant = mag > rel_threshold * peak
    fraction = float(significant.sum()) / float(n * n)

    on_grid = True
    predicted: set[int] = set()
    try:
        for path in h.source.paths:
            alpha = path.doppler
            if abs(alpha - round(alpha)) > 1e-9:
                on_grid = False
                continue
            predicted.add(path_displacement(path.delay, int(round(alpha)), h.params))
    except UnsupportedRegimeError:
        on_grid = False

    rows = np.arange(n)
    diag_index = (rows[:, None] - rows[None, :]) % n
    if predicted:
        off_predicted = ~np.isin(diag_index, sorted(predicted))
    else:
        off_predicted = np.ones((n, n), dtype=bool)
    outside = mag[significant & off_predicted]
    leakage = float(outside.max() / peak) if outside.size else 0.0

    occupied = {int(d) for d in np.unique(diag_index[significant])}
    separation = (
        on_grid
        and occupied == predicted
        and len(predicted) == len(h.source.paths)
    )
    return {
        "significant_fraction": fraction,
        "per_path_separation": bool(separation),
        "max_offdiag_leakage": leakage,
    }


@dataclass(frozen=True)
class RangeDopplerMap:
    """Matched-filter energy over the integer (delay, Doppler) grid."""

    delays: np.ndarray
    dopplers: np.ndarray
    metric: np.ndarray

    def peak(self) -> tuple[int, int]:
        """Grid cell (delay, doppler) with the largest metric."""
        flat = int(np.argmax(self.metric))
        i, j = np.unravel_index(flat, self.metric.shape)
        return int(self.delays[i]), int(self.dopplers[j])


def range_doppler_map(
    tx: np.ndarray,
    rx: np.ndarray,
    p: WaveformParams,
    l_max: int,
    alpha_max: int,
) -> RangeDopplerMap:
    """Correlate a received payload against delay-Doppler shifted copies of
    the transmitted one.

    metric[l, a] = | sum_m rx[m] conj(tx[(m - l) mod n]) exp(-i 2 pi a m / n) |^2

    computed for l in 0..l_max and a in -alpha_max..alpha_max. Both payload
    vectors are the n post-prefix samples.
    """
    n = p.n
    tx = np.asarray(tx, dtype=np.complex128)
    rx = np.asarray(rx, dtype=np.complex128)
    if tx.shape != (n,) or rx.shape != (n,):
        raise ValueError(f"tx and rx must both have length {n}")
    if l_max < 0 or alpha_max < 0:
        raise ValueError("l_max and alpha_max must be non-negative")
    if l_max > n // 2 or alpha_max > n // 2:
        raise ValueError(
            f"grid bounds (l_max={l_max}, alpha_max={alpha_max}) must not exceed n/2 = {n // 2}"
        )
    delays = np.arange(l_max + 1)
    dopplers = np.arange(-alpha_max, alpha_max + 1)
    metric = np.empty((l_max + 1, 2 * alpha_max + 1), dtype=np.float64)
    for i, l in enumerate(delays):
        product = rx * np.conj(np.roll(tx, l))
        spectrum = np.fft.fft(product)  # bin a holds sum with exp(-i 2 pi a m / n)
        metric[i, :] = np.abs(spectrum[dopplers % n]) ** 2
    return RangeDopplerMap(delays=delays, dopplers=dopplers, metric=metric)
