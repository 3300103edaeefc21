"""Command-line front end.

    chirpmux <subcommand> --config <file> --out <dir> [--seed <u64>] [--threads <k>]

Subcommands: ber, effchan, sense, shift, sweep-c1. Each run writes its CSV
artifact(s), optional figures, and a run manifest (config echo, effective
seed, sha256 of every artifact) into the output directory. Identical
(config, seed) pairs produce byte-identical CSV output.

Exit codes: 0 success, 2 I/O failure, 3 config parse or validation failure,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    SpectrogramSpec,
    measure_start_frequency_shift,
    range_doppler_map,
    sparsity_metrics,
)
from .ber import _draw_channel, run_ber_experiment
from .channel import ChannelModel, apply_channel
from .config import ExperimentConfig, parse_config
from .errors import (
    ConfigError,
    EmptyChannelError,
    IllConditionedError,
    ResolutionError,
    UnsupportedRegimeError,
)
from .link import build_effective_channel
from .modulation import Constellation, map_bits
from .waveform import WaveformParams, add_cpp, idaft, strip_cpp

EXIT_OK = 0
EXIT_IO = 2
EXIT_CONFIG = 3
EXIT_NUMERICAL = 4

_EFFCHAN_REL_THRESHOLD = 1e-6


def _fmt(value) -> str:
    """CSV cell formatting: shortest decimal that round-trips."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_dir: Path, subcommand: str, cfg: ExperimentConfig, names: list[str]) -> None:
    artifacts = {
        name: {"sha256": _sha256(out_dir / name), "bytes": (out_dir / name).stat().st_size}
        for name in sorted(names)
    }
    manifest = {
        "subcommand": subcommand,
        "experiment": cfg.experiment_id,
        "seed": cfg.seed,
        "config": cfg.raw,
        "resolved": {
            "c1": cfg.c1,
            "c2": cfg.c2,
            "cpp_len": cfg.cpp_len,
            "l_max": cfg.l_max,
            "alpha_max": cfg.alpha_max,
            "pilot_guard": cfg.pilot.guard,
        },
        "artifacts": artifacts,
    }
    with open(out_dir / "manifest.json", "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _concrete_channel(cfg: ExperimentConfig, noise_variance: float = 0.0) -> ChannelModel:
    """Explicit paths as configured, or one seeded draw from the profile."""
    if cfg.paths is not None:
        return ChannelModel(paths=cfg.paths, noise_variance=noise_variance)
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    drawn = _draw_channel(cfg, rng)
    return ChannelModel(paths=drawn.paths, noise_variance=noise_variance)


def _cmd_ber(cfg: ExperimentConfig, out_dir: Path, threads: int) -> list[str]:
    records = run_ber_experiment(cfg, threads=threads)
    rows = [[r.snr_db, r.trials, r.total_bits, r.bit_errors, r.ber] for r in records]
    _write_csv(out_dir / "ber.csv", ["snr_db", "trials", "total_bits", "bit_errors", "ber"], rows)
    names = ["ber.csv"]
    if cfg.figures:
        from . import figures

        figures.render_ber(records, out_dir / "ber.png")
        names.append("ber.png")
    return names


def _cmd_effchan(cfg: ExperimentConfig, out_dir: Path, threads: int) -> list[str]:
    h = build_effective_channel(_concrete_channel(cfg), cfg.waveform_params)
    mag = np.abs(h.matrix)
    floor = mag.max() * _EFFCHAN_REL_THRESHOLD
    rows = []
    for row in range(cfg.n):
        for col in range(cfg.n):
            if mag[row, col] > floor:
                entry = h.matrix[row, col]
                rows.append([row, col, entry.real, entry.imag, mag[row, col]])
    _write_csv(out_dir / "effchan.csv", ["row", "col", "re", "im", "mag"], rows)
    names = ["effchan.csv"]
    if cfg.figures:
        from . import figures

        figures.render_effchan(h.matrix, out_dir / "effchan.png")
        names.append("effchan.png")
    return names


def _cmd_sense(cfg: ExperimentConfig, out_dir: Path, threads: int) -> list[str]:
    p = cfg.waveform_params
    sigma2 = cfg.sigma2(cfg.snr_db[0])
    channel = _concrete_channel(cfg, noise_variance=sigma2)
    rng = np.random.Generator(np.random.Philox(key=cfg.seed ^ 0x53454E53))
    constellation = Constellation.by_name(cfg.modulation)
    bits = rng.integers(0, 2, size=cfg.n * constellation.bits_per_symbol, dtype=np.uint8)
    tx_payload = idaft(map_bits(bits, constellation), p)
    noise_seed = int(rng.integers(0, 2**63 - 1))
    rx_payload = strip_cpp(apply_channel(add_cpp(tx_payload, p), channel, p, noise_seed), p)
    rd = range_doppler_map(tx_payload, rx_payload, p, cfg.sensing.l_max, cfg.sensing.alpha_max)
    rows = [
        [int(delay), int(doppler), rd.metric[i, j]]
        for i, delay in enumerate(rd.delays)
        for j, doppler in enumerate(rd.dopplers)
    ]
    _write_csv(out_dir / "sense.csv", ["delay", "doppler", "metric"], rows)
    names = ["sense.csv"]
    if cfg.figures:
        from . import figures

        figures.render_sense(rd, out_dir / "sense.png")
        names.append("sense.png")
    return names


def _cmd_shift(cfg: ExperimentConfig, out_dir: Path, threads: int) -> list[str]:
    n = cfg.n
    defaults = SpectrogramSpec.for_block(n)
    spec = SpectrogramSpec(
        window_len=cfg.shift.window_len or defaults.window_len,
        hop=cfg.shift.hop or defaults.hop,
        fft_len=cfg.shift.fft_len or defaults.fft_len,
    )
    rows = []
    dict_rows = []
    for k in cfg.shift.rates_2nc1:
        rate = k / (2.0 * n)
        for delay in cfg.shift.delays:
            for doppler in cfg.shift.dopplers:
                measured = measure_start_frequency_shift(rate, delay, doppler, n, spec)
                predicted = doppler - 2.0 * n * rate * delay
                predicted = (predicted + n / 2) % n - n / 2
                rows.append([rate, delay, doppler, measured, predicted])
                dict_rows.append({"measured_shift": measured, "predicted_shift": predicted})
    _write_csv(
        out_dir / "shift.csv",
        ["chirp_rate", "delay", "doppler", "measured_shift", "predicted_shift"],
        rows,
    )
    names = ["shift.csv"]
    if cfg.figures:
        from . import figures

        figures.render_shift(dict_rows, out_dir / "shift.png")
        names.append("shift.png")
    return names


def _cmd_sweep_c1(cfg: ExperimentConfig, out_dir: Path, threads: int) -> list[str]:
    channel = cfg.fixed_channel()
    rows = []
    dict_rows = []
    for k in cfg.sweep.two_n_c1_values:
        params = WaveformParams(n=cfg.n, c1=k / (2.0 * cfg.n), c2=cfg.c2, cpp_len=cfg.cpp_len)
        metrics = sparsity_metrics(
            build_effective_channel(channel, params), cfg.sweep.rel_threshold
        )
        rows.append(
            [
                k,
                params.c1,
                metrics["significant_fraction"],
                metrics["per_path_separation"],
                metrics["max_offdiag_leakage"],
            ]
        )
        dict_rows.append({"two_n_c1": k, **metrics})
    _write_csv(
        out_dir / "sweep_c1.csv",
        ["two_n_c1", "c1", "significant_fraction", "per_path_separation", "max_offdiag_leakage"],
        rows,
    )
    names = ["sweep_c1.csv"]
    if cfg.figures:
        from . import figures

        figures.render_sweep(dict_rows, out_dir / "sweep_c1.png")
        names.append("sweep_c1.png")
    return names


_COMMANDS = {
    "ber": _cmd_ber,
    "effchan": _cmd_effchan,
    "sense": _cmd_sense,
    "shift": _cmd_shift,
    "sweep-c1": _cmd_sweep_c1,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chirpmux",
        description="Chirp multicarrier waveform simulator for delay-Doppler channels.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, help_text in [
        ("ber", "Monte-Carlo bit error rates over the configured SNR list"),
        ("effchan", "significant entries of the effective channel matrix"),
        ("sense", "matched-filter range-Doppler map of one received frame"),
        ("shift", "spectral displacement law measured against its prediction"),
        ("sweep-c1", "sparsity metrics while sweeping the chirp rate c1"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the YAML experiment file")
        cmd.add_argument("--out", required=True, help="output directory for artifacts")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument(
            "--threads",
            type=int,
            default=None,
            help="worker threads for trials (default: AFL_THREADS or 1)",
        )
    return parser


def _resolve_threads(arg_value: int | None) -> int:
    if arg_value is not None:
        threads = arg_value
    else:
        env = os.environ.get("AFL_THREADS")
        if env is None:
            threads = 1
        else:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError(f"AFL_THREADS must be an integer, got {env!r}")
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    return threads


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        threads = _resolve_threads(args.threads)
        cfg = parse_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError(f"--seed must be in [0, 2^64), got {args.seed}")
            cfg = dataclasses.replace(cfg, seed=args.seed)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        names = _COMMANDS[args.subcommand](cfg, out_dir, threads)
        _write_manifest(out_dir, args.subcommand, cfg, names)
    except (IllConditionedError, ResolutionError, UnsupportedRegimeError, EmptyChannelError,
            np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    for name in names + ["manifest.json"]:
        print(f"wrote {out_dir / name}")
    return EXIT_OK
