"""Figure rendering for bench reports: win-rate and optimality-ratio bars,
and gamma-sweep curves. PNGs land next to the JSON/CSV reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def _bar(ax, labels, means, stds, title, ylabel):
    x = range(len(labels))
    ax.bar(x, means, yerr=stds, capsize=3, color="#4878b0")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.set_ylim(0, max(1.05, max((m or 0) for m in means) * 1.1))
    ax.grid(axis="y", alpha=0.3)


def render_bench_figures(report: dict, prefix: str) -> list:
    """Render per-strategy win-rate and optimality-ratio bar charts from a
    BenchReport dict; returns the written paths."""
    summary = report["summary"]
    labels = [row["strategy"] for row in summary]
    paths = []

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    _bar(
        axes[0],
        labels,
        [row["mean_win_rate"] or 0.0 for row in summary],
        [row["std_win_rate"] or 0.0 for row in summary],
        "Win rate",
        "mean win rate",
    )
    _bar(
        axes[1],
        labels,
        [row["mean_opt_ratio"] or 0.0 for row in summary],
        [row["std_opt_ratio"] or 0.0 for row in summary],
        "Optimality ratio",
        "mean optimality ratio",
    )
    cfg = report["config"]
    fig.suptitle(f"m={cfg['m']} d={cfg['d']} k={cfg['k']} ({cfg['oracle_mode']['mode']})")
    fig.tight_layout()
    path = f"{prefix}_summary.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)
    return paths


def render_sweep_figures(sweep: dict, prefix: str) -> list:
    """Render mean win rate and optimality ratio vs gamma, one line per
    strategy, from a GammaSweepReport dict."""
    table = sweep["table"]
    strategies = []
    for row in table:
        if row["strategy"] not in strategies:
            strategies.append(row["strategy"])
    gammas = sweep["gammas"]

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for metric, ax, label in (
        ("mean_win_rate", axes[0], "mean win rate"),
        ("mean_opt_ratio", axes[1], "mean optimality ratio"),
    ):
        for strat in strategies:
            ys = [row[metric] for row in table if row["strategy"] == strat]
            ax.plot(gammas, ys, marker="o", label=strat)
        ax.set_xscale("log")
        ax.set_xlabel("gamma")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    path = f"{prefix}_gamma_sweep.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]
