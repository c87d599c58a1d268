"""Write-only SVG figures for sweep results.

The SVG backend is pinned to a fixed hash salt and no date stamp, so the same
data always produces byte-identical files.
"""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_RC = {"svg.hashsalt": "hessk", "svg.fonttype": "none", "font.size": 9}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _by_n(rows, key):
    series = defaultdict(list)
    for row in rows:
        value = row.get(key)
        if value is not None:
            series[row["n"]].append((row["k"], value))
    return {n: sorted(pts) for n, pts in sorted(series.items())}


def plot_gamma_sweep(rows, path) -> Path:
    """Estimated definiteness constant against k, one line per n."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        for n, pts in _by_n(rows, "gamma_estimate").items():
            ks, vals = zip(*pts)
            ax.plot(ks, vals, marker="o", label=f"n={n}")
        ax.set_xlabel("k")
        ax.set_ylabel("estimated constant (empirical upper bound)")
        ax.set_yscale("log")
        ax.legend(fontsize=7, ncol=2)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        return _save(fig, path)


def plot_margin_sweep(rows, path) -> Path:
    """Worst d-concavity margin per cell; below zero means every pair had slack."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        for n, pts in _by_n(rows, "dconcavity_worst_margin").items():
            ks, vals = zip(*pts)
            ax.plot(ks, vals, marker="s", label=f"n={n}")
        ax.axhline(0.0, color="black", lw=0.8)
        ax.set_xlabel("k")
        ax.set_ylabel("worst margin (lhs - rhs)")
        ax.set_yscale("symlog", linthresh=1e-3)
        ax.legend(fontsize=7, ncol=2)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        return _save(fig, path)
