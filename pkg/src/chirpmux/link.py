"""Equalizer-facing channel: effective matrix, displacement geometry,
equalizers, and the single-pilot estimator.

In the affine-frequency domain a path with integer delay l and integer
Doppler alpha occupies exactly one circular off-diagonal of the effective
matrix, at index

    (alpha - 2 n c1 l) mod n

counted as (row - col) mod n: Doppler pushes energy down the rows while
delay, coupled through the time-side chirp rate c1, pushes it back up. With
c1 at least (2 alpha_max + 1) / (2 n) no two grid paths share an index, which
is what makes one pilot sufficient to read off the whole channel.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import ChannelModel, PathSpec, time_channel_matrix
from .errors import (
    AmbiguousDisplacementError,
    BandCoverageWarning,
    EmptyChannelError,
    IllConditionedError,
    UnsupportedRegimeError,
)
from .waveform import Frame, WaveformParams, transform_matrix

_COND_LIMIT = 1e12


class EqualizerKind(Enum):
    ZF = "zf"
    MMSE = "mmse"
    BANDED_MMSE = "banded_mmse"
    MATCHED_FILTER = "matched_filter"


@dataclass(frozen=True)
class EqualizerSpec:
    kind: EqualizerKind = EqualizerKind.MMSE
    band_halfwidth: int = 1

    def __post_init__(self) -> None:
        if self.band_halfwidth < 0:
            raise ValueError(f"band_halfwidth must be non-negative, got {self.band_halfwidth}")


@dataclass(frozen=True)
class EffectiveChannel:
    """Affine-domain channel matrix together with its provenance."""

    matrix: np.ndarray
    params: WaveformParams
    source: ChannelModel


def build_effective_channel(ch: ChannelModel, p: WaveformParams) -> EffectiveChannel:
    """Conjugate the time channel by the transform: A H_t A^H.

    Equals what one frame actually experiences: transmit through idaft and
    the prefix, receive through strip and daft.
    """
    a = transform_matrix(p)
    h_t = time_channel_matrix(ch, p)
    matrix = a @ h_t @ a.conj().T
    return EffectiveChannel(matrix=matrix, params=p, source=ch)


def _two_n_c1(p: WaveformParams) -> int:
    value = 2.0 * p.n * p.c1
    rounded = round(value)
    if abs(value - rounded) > 1e-9:
        raise UnsupportedRegimeError(
            f"2*n*c1 = {value} is not an integer; displacement indices are only "
            "defined on the integer chirp grid"
        )
    return int(rounded)


def path_displacement(l: int, alpha: int, p: WaveformParams) -> int:
    """Circular off-diagonal index (row - col) mod n hit by a grid path."""
    if not isinstance(l, (int, np.integer)) or isinstance(l, bool) or l < 0:
        raise ValueError(f"delay must be a non-negative integer, got {l!r}")
    if not isinstance(alpha, (int, np.integer)) or isinstance(alpha, bool):
        raise ValueError(f"alpha must be an integer, got {alpha!r}")
    return int((alpha - _two_n_c1(p) * l) % p.n)


def min_c1_full_diversity(alpha_max: int, n: int) -> float:
    """Smallest chirp rate separating every (delay, Doppler) grid pair.

    Returns (2 alpha_max + 1) / (2 n). At this rate the displacement map is
    injective on the grid of integer delays 0..l_max and |alpha| <= alpha_max
    exactly when (l_max + 1)(2 alpha_max + 1) <= n, i.e. when the occupied
    displacement range fits one frame; one step past that bound the extreme
    corners of the grid wrap onto each other. Any smaller rate admits a
    collision already at adjacent delays, such as (0, -alpha_max) against
    (1, alpha_max).
    """
    if not isinstance(alpha_max, (int, np.integer)) or isinstance(alpha_max, bool) or alpha_max < 0:
        raise ValueError(f"alpha_max must be a non-negative integer, got {alpha_max!r}")
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    if alpha_max >= n / 4:
        raise ValueError(
            f"alpha_max {alpha_max} is too large for n = {n}; need alpha_max < n/4"
        )
    return (2 * alpha_max + 1) / (2 * n)


def _require_square(h: EffectiveChannel, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.complex128)
    n = h.params.n
    if h.matrix.shape != (n, n):
        raise ValueError(f"effective matrix must be {n}x{n}, got {h.matrix.shape}")
    if y.shape != (n,):
        raise ValueError(f"observation must have length {n}, got shape {y.shape}")
    return y


def _mmse_apply(matrix: np.ndarray, y: np.ndarray, sigma2: float) -> np.ndarray:
    n = matrix.shape[0]
    gram = matrix @ matrix.conj().T + sigma2 * np.eye(n)
    try:
        z = np.linalg.solve(gram, y)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(f"MMSE system is singular: {exc}") from exc
    return matrix.conj().T @ z


def _band_mask(h: EffectiveChannel, halfwidth: int) -> np.ndarray:
    n = h.params.n
    k = 2.0 * n * h.params.c1
    centers = sorted(
        {int(round(path.doppler - k * path.delay)) % n for path in h.source.paths}
    )
    rows = np.arange(n)
    diag = (rows[:, None] - rows[None, :]) % n
    mask = np.zeros((n, n), dtype=bool)
    for center in centers:
        dist = np.minimum((diag - center) % n, (center - diag) % n)
        mask |= dist <= halfwidth
    return mask


def equalize(
    y: np.ndarray, h: EffectiveChannel, sigma2: float, eq: EqualizerSpec
) -> np.ndarray:
    """Recover affine-domain symbols from one observed frame.

    ZF solves H x = y and refuses near-singular systems. MMSE applies
    H^H (H H^H + sigma2 I)^{-1}. BANDED_MMSE first zeroes entries farther than
    band_halfwidth (circularly) from every path's displacement diagonal, then
    applies MMSE; if the band misses all significant entries a
    BandCoverageWarning is emitted. MATCHED_FILTER applies H^H.
    """
    y = _require_square(h, y)
    if sigma2 < 0.0:
        raise ValueError(f"sigma2 must be non-negative, got {sigma2}")
    if eq.kind is EqualizerKind.ZF:
        cond = np.linalg.cond(h.matrix)
        if not np.isfinite(cond) or cond > _COND_LIMIT:
            raise IllConditionedError(
                f"effective matrix condition number {cond:.3e} exceeds {_COND_LIMIT:.1e}"
            )
        return np.linalg.solve(h.matrix, y)
    if eq.kind is EqualizerKind.MMSE:
        return _mmse_apply(h.matrix, y, sigma2)
    if eq.kind is EqualizerKind.MATCHED_FILTER:
        return h.matrix.conj().T @ y
    if eq.kind is EqualizerKind.BANDED_MMSE:
        mask = _band_mask(h, eq.band_halfwidth)
        banded = np.where(mask, h.matrix, 0.0)
        peak = np.abs(h.matrix).max()
        if peak > 0.0 and np.abs(banded).max() < 0.01 * peak:
            warnings.warn(
                "equalizer band covers no significant channel entry; "
                "increase band_halfwidth",
                BandCoverageWarning,
                stacklevel=2,
            )
        return _mmse_apply(banded, y, sigma2)
    raise ValueError(f"unknown equalizer kind {eq.kind!r}")


def estimate_channel_single_pilot(
    y: np.ndarray,
    frame_layout: Frame,
    p: WaveformParams,
    l_max: int,
    alpha_max: int,
    threshold: float = 0.2,
) -> ChannelModel:
    """Read the channel off one received frame using the embedded pilot.

    The pilot sits at slot 0 with its known value stored in the frame; every
    grid path (l <= l_max, |alpha| <= alpha_max) deposits the pilot on its own
    displacement row, so each row above threshold * (strongest candidate row)
    identifies one (delay, Doppler) pair. The gain follows by dividing out
    the analytically built unit-gain single-path entry for that pair.

    The layout must reserve at least l_max * (2 alpha_max + 1) guard slots on
    each cyclic side of the pilot. Exact recovery against data leakage
    additionally needs 2 alpha_max more slots per side (the displacement
    difference set), which callers wanting noiseless exactness should budget.
    """
    n = p.n
    y = np.asarray(y, dtype=np.complex128)
    if y.shape != (n,):
        raise ValueError(f"observation must have length {n}, got shape {y.shape}")
    if l_max < 0 or alpha_max < 0:
        raise ValueError("l_max and alpha_max must be non-negative")
    if l_max > p.cpp_len:
        raise ValueError(f"l_max {l_max} exceeds cpp_len {p.cpp_len}")
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    layout = frame_layout.layout
    if layout.pilot != (0,):
        raise ValueError("layout must place a single pilot at slot 0")
    required = l_max * (2 * alpha_max + 1)
    guard = set(layout.guard)
    for off in range(1, required + 1):
        if off % n not in guard or (-off) % n not in guard:
            raise ValueError(
                f"guard must span at least {required} slots on each side of the pilot"
            )
    pilot_value = complex(frame_layout.symbols[0])
    if pilot_value == 0:
        raise ValueError("pilot value stored in the frame must be nonzero")

    lookup: dict[int, tuple[int, int]] = {}
    for l in range(l_max + 1):
        for alpha in range(-alpha_max, alpha_max + 1):
            d = path_displacement(l, alpha, p)
            if d in lookup:
                raise AmbiguousDisplacementError(
                    f"displacement {d} is shared by (l={lookup[d][0]}, alpha={lookup[d][1]}) "
                    f"and (l={l}, alpha={alpha}); c1 does not satisfy the diversity bound"
                )
            lookup[d] = (l, alpha)

    candidate_rows = np.array(sorted(lookup.keys()))
    magnitudes = np.abs(y[candidate_rows])
    peak = np.abs(y).max()
    if peak == 0.0:
        raise EmptyChannelError("received frame is identically zero")
    detected = candidate_rows[magnitudes > threshold * peak]
    paths = []
    for row in detected:
        l, alpha = lookup[int(row)]
        probe = build_effective_channel(
            ChannelModel(paths=(PathSpec(1.0 + 0.0j, l, float(alpha)),)), p
        )
        ref = probe.matrix[int(row), 0]
        gain = y[int(row)] / (ref * pilot_value)
        paths.append(PathSpec(complex(gain), l, float(alpha)))
    if not paths:
        raise EmptyChannelError("no pilot response above threshold")
    return ChannelModel(paths=tuple(paths), noise_variance=0.0)
