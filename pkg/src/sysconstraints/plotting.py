"""Figures for the report commands, written straight to image files."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

GOLDEN = (5 ** 0.5 - 1) / 2


def _figure(width: float = 6.0, height: float | None = None) -> Figure:
    fig = Figure(figsize=(width, height or width * GOLDEN), facecolor="w")
    return fig


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    return path


def plot_channel_metrics(metrics, path, title: str = "") -> Path:
    """Bars for H(A), H(B), MI, MB and S, with V drawn as a separate bar."""
    names = ["H(A)", "H(B)", "MI", "MB", "S", "V"]
    values = [
        metrics.h_a_bits, metrics.h_b_bits, metrics.mi_bits,
        metrics.mb_bits, metrics.s_bound_bits, metrics.variation_bits,
    ]
    colors = ["#4c72b0", "#4c72b0", "#55a868", "#c44e52", "#8172b2", "#ccb974"]
    fig = _figure()
    ax = fig.add_subplot(111)
    ax.bar(names, values, color=colors)
    ax.axhline(metrics.s_bound_bits, ls="--", lw=1, color="k")
    ax.set_ylabel("bits")
    ax.set_title(title or "channel metrics")
    return _save(fig, path)


def plot_variation(report, path) -> Path:
    """Per-layer variation bars (excluded layers hatched) beside each layer's log2 n."""
    rows = report.per_layer
    x = np.arange(len(rows))
    fig = _figure(max(6.0, 0.8 * len(rows) + 2))
    ax = fig.add_subplot(111)
    bars = ax.bar(x - 0.2, [r.v_bits for r in rows], width=0.4, label="V", color="#c44e52")
    for bar, row in zip(bars, rows):
        if not row.included:
            bar.set_hatch("//")
            bar.set_alpha(0.4)
    ax.bar(x + 0.2, [r.s_bound_bits for r in rows], width=0.4, label="log2 n", color="#4c72b0")
    ax.set_xticks(x)
    ax.set_xticklabels([r.layer_id for r in rows], rotation=30, ha="right")
    ax.set_ylabel("bits")
    ax.set_title(f"{report.system_id}: total V = {report.total_v_bits:.3f} bits")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_simulation(report, path) -> Path:
    """Heat map of delivered joint counts plus analytic vs empirical MI."""
    fig = _figure(10.0, 4.5)
    ax = fig.add_subplot(121)
    if report.counts is not None:
        im = ax.imshow(report.counts, cmap="viridis", aspect="auto")
        fig.colorbar(im, ax=ax, label="count")
        tx, rx = report.labels
        if len(tx) <= 32 and len(rx) <= 32:
            ax.set_yticks(range(len(tx)), labels=tx, fontsize=7)
            ax.set_xticks(range(len(rx)), labels=rx, fontsize=7)
        ax.set_xlabel("receiver element")
        ax.set_ylabel("transmitter element")
        ax.set_title(f"selected {report.selected}")
    else:
        ax.text(0.5, 0.5, f"negotiation failed:\n{report.failure_reason}", ha="center", va="center")
        ax.set_axis_off()
    ax2 = fig.add_subplot(122)
    analytic = report.analytic.mi_bits if report.analytic is not None else 0.0
    ax2.bar(["analytic MI", "empirical MI"], [analytic, report.empirical_mi_bits], color=["#4c72b0", "#55a868"])
    ax2.set_ylabel("bits")
    return _save(fig, path)
