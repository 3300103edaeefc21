"""Doubly dispersive channel: sparse delay-Doppler paths plus white noise.

Each path delays the prefixed frame by an integer number of samples and
modulates it by a Doppler phasor referenced to the payload start, so sample
index m of the received frame sees exp(i 2 pi f (m - cpp_len) / n). Noise is
circularly symmetric complex Gaussian, drawn once per call from a
counter-based Philox stream so results are reproducible regardless of how
calls interleave.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .waveform import WaveformParams

SPEED_OF_LIGHT_M_S = 299_792_458.0


@dataclass(frozen=True)
class PathSpec:
    """One propagation path: complex gain, integer delay, real Doppler.

    Doppler is normalized to cycles per frame, i.e. 1.0 means one full
    rotation across the n payload samples (one subcarrier spacing).
    """

    gain: complex
    delay: int
    doppler: float

    def __post_init__(self) -> None:
        if not isinstance(self.delay, (int, np.integer)) or isinstance(self.delay, bool):
            raise ValueError(f"delay must be an integer, got {self.delay!r}")
        if self.delay < 0:
            raise ValueError(f"delay must be non-negative, got {self.delay}")
        if abs(self.gain) == 0.0:
            raise ValueError("path gain must be nonzero")


@dataclass(frozen=True)
class ChannelModel:
    """A non-empty set of paths with distinct (delay, doppler) pairs."""

    paths: tuple[PathSpec, ...]
    noise_variance: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "paths", tuple(self.paths))
        if len(self.paths) == 0:
            raise ValueError("channel must contain at least one path")
        keys = [(p.delay, p.doppler) for p in self.paths]
        if len(set(keys)) != len(keys):
            raise ValueError("paths must have distinct (delay, doppler) pairs")
        if self.noise_variance < 0.0:
            raise ValueError(f"noise_variance must be non-negative, got {self.noise_variance}")

    @property
    def max_delay(self) -> int:
        return max(p.delay for p in self.paths)

    def normalized(self) -> "ChannelModel":
        """Copy with gains rescaled to unit total power, sum |gain|^2 = 1."""
        power = sum(abs(p.gain) ** 2 for p in self.paths)
        scale = 1.0 / np.sqrt(power)
        return ChannelModel(
            paths=tuple(PathSpec(p.gain * scale, p.delay, p.doppler) for p in self.paths),
            noise_variance=self.noise_variance,
        )


def apply_channel(
    s: np.ndarray, ch: ChannelModel, p: WaveformParams, noise_seed: int
) -> np.ndarray:
    """Push a prefixed frame through the channel and add noise.

    r[m] = sum_p gain_p * exp(i 2 pi f_p (m - cpp_len) / n) * s[m - delay_p] + w[m]

    with s[m] = 0 for m < 0. Input and output have length n + cpp_len.
    """
    total = p.n + p.cpp_len
    s = np.asarray(s, dtype=np.complex128)
    if s.shape != (total,):
        raise ValueError(f"frame must have length n + cpp_len = {total}, got shape {s.shape}")
    if ch.max_delay > p.cpp_len:
        raise ValueError(
            f"path delay {ch.max_delay} exceeds cpp_len {p.cpp_len}; lengthen the prefix"
        )
    m = np.arange(total, dtype=np.float64)
    r = np.zeros(total, dtype=np.complex128)
    for path in ch.paths:
        shifted = np.zeros(total, dtype=np.complex128)
        if path.delay == 0:
            shifted[:] = s
        else:
            shifted[path.delay :] = s[: total - path.delay]
        r += path.gain * np.exp(2j * np.pi * path.doppler * (m - p.cpp_len) / p.n) * shifted
    if ch.noise_variance > 0.0:
        rng = np.random.Generator(np.random.Philox(key=noise_seed))
        scale = np.sqrt(ch.noise_variance / 2.0)
        r += scale * (rng.standard_normal(total) + 1j * rng.standard_normal(total))
    return r


def time_channel_matrix(ch: ChannelModel, p: WaveformParams) -> np.ndarray:
    """Payload-to-payload channel matrix for one prefixed frame.

    Returns the n-by-n matrix H with strip_cpp(apply_channel(add_cpp(s))) = H s
    for noiseless channels. Rows below a path's delay reach into the prefix,
    so those entries carry the prefix rotation exp(-i 2 pi c1 (n^2 + 2 n n'))
    with n' = row - delay < 0; all other entries on the path's circulant
    diagonal carry only the Doppler phasor.
    """
    if ch.max_delay > p.cpp_len:
        raise ValueError(
            f"path delay {ch.max_delay} exceeds cpp_len {p.cpp_len}; lengthen the prefix"
        )
    n = p.n
    h = np.zeros((n, n), dtype=np.complex128)
    rows = np.arange(n)
    for path in ch.paths:
        cols = (rows - path.delay) % n
        phase = np.exp(2j * np.pi * path.doppler * rows / n)
        wrapped = rows < path.delay
        if path.delay > 0 and p.c1 != 0.0:
            n_prime = (rows - path.delay).astype(np.float64)
            wrap_phase = np.exp(-2j * np.pi * p.c1 * (n * n + 2.0 * n * n_prime))
            phase = np.where(wrapped, phase * wrap_phase, phase)
        h[rows, cols] += path.gain * phase
    return h


def normalized_doppler(speed_m_s: float, carrier_hz: float, subcarrier_spacing_hz: float) -> float:
    """Doppler shift as a fraction of the subcarrier spacing.

    speed * carrier / c gives the shift in Hz; dividing by the spacing yields
    the normalized value used as PathSpec.doppler (cycles per frame).
    """
    if speed_m_s < 0.0:
        raise ValueError(f"speed must be non-negative, got {speed_m_s}")
    if carrier_hz <= 0.0 or subcarrier_spacing_hz <= 0.0:
        raise ValueError("carrier and subcarrier spacing must be positive")
    return (speed_m_s * carrier_hz / SPEED_OF_LIGHT_M_S) / subcarrier_spacing_hz
