"""Figure rendering for the command-line reports.

Each function takes already-computed results and writes one PNG next to the
CSV artifact. Rendering is optional (config key figures) and never changes
the CSV contract.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)


def render_ber(records, path: Path) -> None:
    snrs = [r.snr_db for r in records]
    bers = [r.ber for r in records]
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    positive = [(s, b) for s, b in zip(snrs, bers) if b > 0]
    zeros = [s for s, b in zip(snrs, bers) if b == 0]
    if positive:
        ax.semilogy([s for s, _ in positive], [b for _, b in positive], "o-")
    if zeros:
        floor = min((b for _, b in positive), default=1e-6)
        ax.semilogy(zeros, [floor * 0.1] * len(zeros), "v", label="no errors observed")
        ax.legend()
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("bit error rate")
    ax.grid(True, which="both", alpha=0.4)
    _save(fig, path)


def render_effchan(matrix: np.ndarray, path: Path) -> None:
    mag = np.abs(matrix)
    floor = mag.max() * 1e-8 if mag.max() > 0 else 1e-12
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    im = ax.imshow(20 * np.log10(np.maximum(mag, floor)), cmap="viridis")
    fig.colorbar(im, ax=ax, label="|entry| (dB)")
    ax.set_xlabel("input index")
    ax.set_ylabel("output index")
    _save(fig, path)


def render_sense(rd_map, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    extent = [
        rd_map.dopplers[0] - 0.5,
        rd_map.dopplers[-1] + 0.5,
        rd_map.delays[-1] + 0.5,
        rd_map.delays[0] - 0.5,
    ]
    im = ax.imshow(rd_map.metric, aspect="auto", extent=extent, cmap="magma")
    fig.colorbar(im, ax=ax, label="matched-filter metric")
    ax.set_xlabel("Doppler (bins)")
    ax.set_ylabel("delay (samples)")
    _save(fig, path)


def render_shift(rows, path: Path) -> None:
    predicted = [row["predicted_shift"] for row in rows]
    measured = [row["measured_shift"] for row in rows]
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    lo = min(predicted + measured) - 1
    hi = max(predicted + measured) + 1
    ax.plot([lo, hi], [lo, hi], "k--", alpha=0.5, label="measured = predicted")
    ax.plot(predicted, measured, "o", alpha=0.7)
    ax.set_xlabel("predicted shift (bins)")
    ax.set_ylabel("measured shift (bins)")
    ax.legend()
    ax.grid(True, alpha=0.4)
    _save(fig, path)


def render_sweep(rows, path: Path) -> None:
    ks = [row["two_n_c1"] for row in rows]
    leak = [max(row["max_offdiag_leakage"], 1e-16) for row in rows]
    separated = [row["per_path_separation"] for row in rows]
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    ax.semilogy(ks, leak, "o-", label="max off-diagonal leakage")
    for k, flag in zip(ks, separated):
        if flag:
            ax.axvspan(k - 0.1, k + 0.1, color="green", alpha=0.15)
    ax.set_xlabel("2 n c1")
    ax.set_ylabel("leakage (relative)")
    ax.set_title("green bands: per-path separation holds")
    ax.grid(True, which="both", alpha=0.4)
    _save(fig, path)
