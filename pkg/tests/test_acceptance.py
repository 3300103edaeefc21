"""End-to-end acceptance checks.

Each test exercises one externally visible guarantee of the package, with an
explicit wall-clock budget, so a green run certifies the whole contract:
transform algebra, chain equivalence, displacement separation, the
spectrogram law, error-rate baselines, Doppler robustness, estimation and
sensing exactness, and CLI reproducibility.
"""

import hashlib
import json
import math
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from chirpmux import (
    ChannelModel,
    FrameLayout,
    Frame,
    PathSpec,
    SpectrogramSpec,
    WaveformParams,
    add_cpp,
    apply_channel,
    build_effective_channel,
    daft,
    estimate_channel_single_pilot,
    idaft,
    map_bits,
    measure_start_frequency_shift,
    min_c1_full_diversity,
    normalized_doppler,
    path_displacement,
    range_doppler_map,
    resolve_config,
    run_ber_experiment,
    sparsity_metrics,
    strip_cpp,
    transform_matrix,
)
from chirpmux.cli import main as cli_main
from chirpmux.modulation import Constellation


@contextmanager
def budget(seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.1f}s, budget {seconds}s"


def random_vector(rng, n):
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)


def test_vehicular_doppler_lands_in_the_awkward_fraction_band():
    fraction = normalized_doppler(120.0 / 3.6, 71e9, 120e3)
    assert 0.06 <= fraction <= 0.08


def test_transform_algebra_across_sizes():
    with budget(5.0):
        rng = np.random.default_rng(2001)
        for n in (4, 8, 16, 64):
            plain = WaveformParams(n=n, c1=0.0, c2=0.0)
            for _ in range(100):
                p = WaveformParams(n=n, c1=rng.uniform(0, 0.5), c2=rng.uniform(0, 0.5))
                x = random_vector(rng, n)
                y = daft(x, p)
                assert abs(np.linalg.norm(y) - np.linalg.norm(x)) < 1e-10
                assert np.max(np.abs(idaft(y, p) - x)) < 1e-10
                x2 = random_vector(rng, n)
                assert np.max(np.abs(daft(x2, plain) - np.fft.fft(x2) / np.sqrt(n))) < 1e-12
            for _ in range(3):
                a = transform_matrix(WaveformParams(n=n, c1=rng.uniform(0, 0.5),
                                                    c2=rng.uniform(0, 0.5)))
                assert np.max(np.abs(np.abs(a) - 1 / np.sqrt(n))) < 1e-12


def test_effective_matrix_equals_the_simulated_chain():
    with budget(10.0):
        n, cpp = 32, 8
        rng = np.random.default_rng(333)
        for _ in range(50):
            num_paths = int(rng.integers(1, 5))
            while True:
                delays = rng.integers(0, cpp + 1, size=num_paths)
                dopplers = np.where(
                    rng.random(num_paths) < 0.5,
                    rng.uniform(-4.0, 4.0, size=num_paths),
                    rng.integers(-4, 5, size=num_paths).astype(float),
                )
                if len({(int(l), float(f)) for l, f in zip(delays, dopplers)}) == num_paths:
                    break
            gains = random_vector(rng, num_paths)
            channel = ChannelModel(
                paths=tuple(
                    PathSpec(complex(g), int(l), float(f))
                    for g, l, f in zip(gains, delays, dopplers)
                )
            )
            p = WaveformParams(
                n=n, c1=int(rng.integers(0, 8)) / (2 * n), c2=rng.uniform(0, 0.1), cpp_len=cpp
            )
            h = build_effective_channel(channel, p)
            for _ in range(3):
                x = random_vector(rng, n)
                chained = daft(strip_cpp(apply_channel(add_cpp(idaft(x, p), p), channel, p, 0), p), p)
                assert np.max(np.abs(h.matrix @ x - chained)) < 1e-10


def test_diversity_rate_separates_every_admissible_path_set():
    # The separable delay grid at rate (2a+1)/(2n) is 0..n//(2a+1)-1: the
    # displacement range then holds (l_max+1)(2a+1) <= n consecutive integers.
    # One delay further the range exceeds n and its corners wrap onto each
    # other, so multi-path draws stay inside the provable grid.
    with budget(30.0):
        n, alpha_max = 64, 2
        span = 2 * alpha_max + 1
        c1 = min_c1_full_diversity(alpha_max, n)
        assert c1 == pytest.approx(5 / 128)
        p = WaveformParams(n=n, c1=c1, cpp_len=12)

        for delay in range(13):
            for doppler in range(-alpha_max, alpha_max + 1):
                channel = ChannelModel(paths=(PathSpec(1.0, delay, float(doppler)),))
                h = build_effective_channel(channel, p)
                d = path_displacement(delay, doppler, p)
                assert int(np.argmax(np.abs(h.matrix[:, 0]))) == d
                metrics = sparsity_metrics(h, 0.01)
                assert metrics["per_path_separation"] is True
                assert metrics["max_offdiag_leakage"] < 1e-9

        grid = [
            (l, a) for l in range(n // span) for a in range(-alpha_max, alpha_max + 1)
        ]
        displacement = {pair: path_displacement(pair[0], pair[1], p) for pair in grid}
        assert len(set(displacement.values())) == len(grid)

        rng = np.random.default_rng(404)
        for _ in range(200):
            size = int(rng.integers(2, 6))
            picks = rng.choice(len(grid), size=size, replace=False)
            paths = tuple(PathSpec(1.0, grid[i][0], float(grid[i][1])) for i in picks)
            assert len({displacement[grid[i]] for i in picks}) == size
            metrics = sparsity_metrics(
                build_effective_channel(ChannelModel(paths=paths), p), 0.01
            )
            assert metrics["per_path_separation"] is True
            assert metrics["max_offdiag_leakage"] < 1e-9
            assert metrics["significant_fraction"] * n * n == pytest.approx(size * n)


def test_spectrogram_shift_obeys_the_displacement_law():
    with budget(30.0):
        n = 1024
        spec = SpectrogramSpec.for_block(n)
        bin_width = n / spec.fft_len
        for k in range(8):
            rate = k / (2 * n)
            for delay in range(4):
                for doppler in range(-2, 3):
                    measured = measure_start_frequency_shift(rate, delay, float(doppler), n, spec)
                    predicted = (doppler - k * delay + n / 2) % n - n / 2
                    assert abs(measured - predicted) <= bin_width


def test_noiseless_chain_is_error_free_and_awgn_matches_theory():
    with budget(30.0):
        noiseless = resolve_config(
            {
                "waveform": {"n": 32, "c1": "auto", "cpp_len": 4},
                "channel": {
                    "paths": [
                        {"gain": 1.0, "delay": 0, "doppler": 0.0},
                        {"gain": [0.0, 0.7], "delay": 2, "doppler": 1.0},
                        {"gain": -0.5, "delay": 4, "doppler": -2.0},
                    ]
                },
                "snr_db": [float("inf")],
                "trials": 20,
                "seed": 55,
                "equalizer": {"kind": "zf"},
            }
        )
        (clean,) = run_ber_experiment(noiseless)
        assert clean.bit_errors == 0 and clean.ber == 0.0

        awgn = resolve_config(
            {
                "waveform": {"n": 64, "c1": 0.0, "c2": 0.0},
                "channel": {"paths": [{"gain": 1.0, "delay": 0, "doppler": 0.0}]},
                "modulation": "qpsk",
                "snr_db": [6.0, 10.0],
                "trials": 800,
                "seed": 606,
                "equalizer": {"kind": "zf"},
            }
        )
        for record in run_ber_experiment(awgn):
            assert record.total_bits >= 100_000
            snr_lin = 10.0 ** (record.snr_db / 10.0)
            expected = 0.5 * math.erfc(math.sqrt(snr_lin / 2.0))
            assert 0.5 * expected <= record.ber <= 2.0 * expected


def test_chirp_rate_diversity_beats_plain_ofdm_under_doppler():
    with budget(300.0):
        def run(c1, seed):
            cfg = resolve_config(
                {
                    "waveform": {"n": 64, "c1": c1, "cpp_len": 2},
                    "channel": {
                        "profile": {
                            "num_paths": 3,
                            "l_max": 2,
                            "alpha_max": 0.3,
                            "fractional": True,
                        }
                    },
                    "modulation": "qpsk",
                    "snr_db": [15.0],
                    "trials": 7813,
                    "seed": seed,
                    "equalizer": {"kind": "mmse"},
                }
            )
            (record,) = run_ber_experiment(cfg)
            assert record.total_bits >= 1_000_000
            return record.ber

        for seed in (1, 2, 3, 4, 5):
            chirped = run("auto", seed)
            plain = run(0.0, seed)
            assert chirped < plain, f"seed {seed}: {chirped} !< {plain}"


def test_pilot_estimation_and_sensing_are_exact_on_the_grid():
    with budget(60.0):
        n, l_max, alpha_max = 64, 3, 2
        p = WaveformParams(n=n, c1=min_c1_full_diversity(alpha_max, n), cpp_len=l_max)
        layout = FrameLayout.single_pilot(n, l_max * (2 * alpha_max + 1))
        rng = np.random.default_rng(888)
        grid = [(l, a) for l in range(l_max + 1) for a in range(-alpha_max, alpha_max + 1)]
        for _ in range(20):
            size = int(rng.integers(1, 5))
            picks = rng.choice(len(grid), size=size, replace=False)
            gains = rng.uniform(0.5, 1.5, size=size) * np.exp(2j * np.pi * rng.random(size))
            truth = {
                (grid[i][0], float(grid[i][1])): complex(g) for i, g in zip(picks, gains)
            }
            channel = ChannelModel(
                paths=tuple(PathSpec(g, l, float(a)) for (l, a), g in truth.items())
            )
            x = np.zeros(n, dtype=np.complex128)
            x[0] = 1.0
            y = daft(strip_cpp(apply_channel(add_cpp(idaft(x, p), p), channel, p, 0), p), p)
            estimate = estimate_channel_single_pilot(
                y, Frame(symbols=x, layout=layout), p, l_max, alpha_max
            )
            found = {(q.delay, q.doppler): q.gain for q in estimate.paths}
            assert set(found) == set(truth)
            for key, gain in truth.items():
                assert abs(found[key] - gain) < 1e-9

        n2 = 128
        p2 = WaveformParams(n=n2, c1=7 / 256, cpp_len=8)
        c = Constellation.qpsk()
        bits = rng.integers(0, 2, size=2 * n2, dtype=np.uint8)
        tx = idaft(map_bits(bits, c), p2)
        for delay in range(9):
            for doppler in range(-4, 5):
                channel = ChannelModel(paths=(PathSpec(1.0, delay, float(doppler)),))
                rx = strip_cpp(apply_channel(add_cpp(tx, p2), channel, p2, 0), p2)
                rd = range_doppler_map(tx, rx, p2, 8, 4)
                assert rd.peak() == (delay, doppler)


def test_cli_reruns_reproduce_artifacts_bit_for_bit(tmp_path):
    with budget(60.0):
        cfg = tmp_path / "run.yaml"
        cfg.write_text(
            "experiment: repeatable\n"
            "waveform: {n: 32, c1: auto, cpp_len: 2}\n"
            "channel:\n"
            "  profile: {num_paths: 2, l_max: 1, alpha_max: 1.0, fractional: true}\n"
            "snr_db: [8.0, 12.0]\n"
            "trials: 60\n"
            "seed: 31337\n"
            "figures: false\n",
            encoding="utf-8",
        )
        out1, out2 = tmp_path / "first", tmp_path / "second"
        assert cli_main(["ber", "--config", str(cfg), "--out", str(out1)]) == 0
        assert cli_main(["ber", "--config", str(cfg), "--out", str(out2)]) == 0
        assert (out1 / "ber.csv").read_bytes() == (out2 / "ber.csv").read_bytes()
        manifest = json.loads((out1 / "manifest.json").read_text())
        for name, meta in manifest["artifacts"].items():
            blob = (out1 / name).read_bytes()
            assert len(blob) == meta["bytes"]
            assert hashlib.sha256(blob).hexdigest() == meta["sha256"]
