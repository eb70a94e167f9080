"""Figure rendering for the simulation report path."""
from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .graph import BipartiteIncidenceGraph  # noqa: E402
from .simulate import EfficiencyRow  # noqa: E402


def save_degree_histograms(graph: BipartiteIncidenceGraph, path: str) -> None:
    """Two-panel histogram of unit out-degrees and motif ancestor counts."""
    alpha = [graph.unit_degree(u) for u in graph.units]
    beta = [graph.multiplicity(k) for k in graph.motifs]
    fig, axes = plt.subplots(1, 2, figsize=(8, 3))
    for ax, data, label in zip(axes, (alpha, beta),
                               ("successors per unit", "ancestors per motif")):
        bins = range(min(data), max(data) + 2)
        ax.hist(data, bins=bins, color="steelblue", edgecolor="white")
        ax.set_xlabel(label)
    axes[0].set_ylabel("count")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_efficiency_curves(rows: Sequence[EfficiencyRow], path: str) -> None:
    """Relative efficiency against the HT estimator, per sample size."""
    by_est: dict[str, list[tuple[int, float]]] = {}
    for row in rows:
        if row.rel_eff is None:
            continue
        by_est.setdefault(row.estimator, []).append((row.m, row.rel_eff))
    fig, ax = plt.subplots(figsize=(6, 4))
    for label in sorted(by_est):
        pts = sorted(by_est[label])
        ax.plot([m for m, _ in pts], [v for _, v in pts], marker="o", label=label)
    ax.axhline(1.0, color="grey", linewidth=0.8, linestyle="--")
    ax.set_xlabel("initial sample size")
    ax.set_ylabel("MSE relative to HT")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
