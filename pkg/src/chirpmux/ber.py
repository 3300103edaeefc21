"""Monte-Carlo bit-error-rate experiments over the full transmit chain.

Every trial runs map -> frame -> idaft -> add_cpp -> apply_channel ->
strip_cpp -> daft -> equalize -> demap. Trials are independent and each one
derives its own seed from the experiment seed and the trial counter, so the
aggregate is identical no matter how trials are scheduled or threaded.
"""

from __future__ import annotations

import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel, PathSpec, apply_channel
from .config import ExperimentConfig
from .errors import EmptyChannelError, IllConditionedError
from .link import (
    EqualizerKind,
    build_effective_channel,
    equalize,
    estimate_channel_single_pilot,
)
from .modulation import Constellation, demap_symbols, map_bits
from .waveform import Frame, FrameLayout, add_cpp, daft, idaft, strip_cpp

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def trial_seed(seed: int, snr_index: int, trial_index: int) -> int:
    """Mix the experiment seed with the (snr, trial) counter.

    The counter is packed into 64 bits, diffused through splitmix64, xored
    into the experiment seed, and diffused once more. Pure arithmetic, so
    any execution order reproduces the same per-trial streams.
    """
    counter = ((snr_index & 0xFFFFFFFF) << 32) | (trial_index & 0xFFFFFFFF)
    return _splitmix64((seed & _MASK64) ^ _splitmix64(counter))


@dataclass(frozen=True)
class ResultRecord:
    """Aggregated outcome of all trials at one SNR point."""

    experiment_id: str
    snr_db: float
    trials: int
    total_bits: int
    bit_errors: int
    ber: float
    wall_time_ms: float


def _draw_channel(cfg: ExperimentConfig, rng: np.random.Generator) -> ChannelModel:
    profile = cfg.profile
    for _ in range(1000):
        delays = rng.integers(0, profile.l_max + 1, size=profile.num_paths)
        if profile.fractional:
            dopplers = rng.uniform(-profile.alpha_max, profile.alpha_max, size=profile.num_paths)
        else:
            bound = int(profile.alpha_max)
            dopplers = rng.integers(-bound, bound + 1, size=profile.num_paths).astype(float)
        pairs = list(zip(delays.tolist(), dopplers.tolist()))
        if len(set(pairs)) == profile.num_paths:
            break
    else:
        raise ValueError(
            "could not draw distinct (delay, doppler) pairs; the profile grid is too small"
        )
    gains = (rng.standard_normal(profile.num_paths) + 1j * rng.standard_normal(profile.num_paths))
    gains /= math.sqrt(2.0)
    model = ChannelModel(
        paths=tuple(
            PathSpec(complex(g), int(l), float(f)) for g, l, f in zip(gains, delays, dopplers)
        )
    )
    return model.normalized() if cfg.normalize else model


def _run_trial(
    cfg: ExperimentConfig,
    layout: FrameLayout,
    constellation: Constellation,
    sigma2: float,
    seed: int,
) -> tuple[int, int, bool]:
    """One frame through the chain. Returns (bits, bit_errors, receiver_fell_back)."""
    p = cfg.waveform_params
    rng = np.random.Generator(np.random.Philox(key=seed))
    channel = cfg.fixed_channel() if cfg.paths is not None else _draw_channel(cfg, rng)
    noise_seed = int(rng.integers(0, 2**63 - 1))
    n_bits = len(layout.data) * constellation.bits_per_symbol
    bits = rng.integers(0, 2, size=n_bits, dtype=np.uint8)

    x = np.zeros(p.n, dtype=np.complex128)
    x[list(layout.data)] = map_bits(bits, constellation)
    pilot_amp = 10.0 ** (cfg.pilot.boost_db / 20.0)
    if layout.pilot:
        x[layout.pilot[0]] = pilot_amp

    s = idaft(x, p)
    r = apply_channel(
        add_cpp(s, p),
        ChannelModel(paths=channel.paths, noise_variance=sigma2),
        p,
        noise_seed,
    )
    y = daft(strip_cpp(r, p), p)

    fell_back = False
    x_hat = y
    known: ChannelModel | None = None
    if cfg.csi == "perfect":
        known = channel
    else:
        reference = np.zeros(p.n, dtype=np.complex128)
        reference[0] = pilot_amp
        try:
            known = estimate_channel_single_pilot(
                y,
                Frame(symbols=reference, layout=layout),
                p,
                cfg.l_max,
                cfg.alpha_max,
                cfg.pilot.threshold,
            )
        except EmptyChannelError:
            fell_back = True
    if known is not None:
        h = build_effective_channel(known, p)
        try:
            x_hat = equalize(y, h, sigma2, cfg.equalizer)
        except IllConditionedError:
            fell_back = True
            x_hat = h.matrix.conj().T @ y
    bits_hat = demap_symbols(x_hat[list(layout.data)], constellation)
    errors = int(np.count_nonzero(bits_hat != bits))
    return n_bits, errors, fell_back


def run_ber_experiment(cfg: ExperimentConfig, threads: int = 1) -> list[ResultRecord]:
    """Run the configured trials at every SNR point and aggregate bit errors.

    Records are deterministic for a given (config, seed) and independent of
    thread count: per-trial seeds come from trial_seed and the aggregation
    is a commutative sum.
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    constellation = Constellation.by_name(cfg.modulation)
    if cfg.csi == "estimated":
        layout = FrameLayout.single_pilot(cfg.n, cfg.pilot.guard)
    else:
        layout = FrameLayout.all_data(cfg.n)
    if not layout.data:
        raise ValueError("frame layout has no data slots; shrink pilot.guard")

    records = []
    for snr_index, snr in enumerate(cfg.snr_db):
        start = time.perf_counter()
        sigma2 = cfg.sigma2(snr)
        seeds = [trial_seed(cfg.seed, snr_index, t) for t in range(cfg.trials)]

        def one(seed: int) -> tuple[int, int, bool]:
            return _run_trial(cfg, layout, constellation, sigma2, seed)

        if threads == 1:
            outcomes = [one(seed) for seed in seeds]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                outcomes = list(pool.map(one, seeds))
        total_bits = sum(o[0] for o in outcomes)
        bit_errors = sum(o[1] for o in outcomes)
        fallbacks = sum(1 for o in outcomes if o[2])
        if fallbacks:
            print(
                f"warning: {fallbacks}/{cfg.trials} trials at {snr} dB fell back to an "
                "unequalized decision (estimation or solve failure)",
                file=sys.stderr,
            )
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        records.append(
            ResultRecord(
                experiment_id=cfg.experiment_id,
                snr_db=float(snr),
                trials=cfg.trials,
                total_bits=total_bits,
                bit_errors=bit_errors,
                ber=bit_errors / total_bits if total_bits else 0.0,
                wall_time_ms=elapsed_ms,
            )
        )
    return records
