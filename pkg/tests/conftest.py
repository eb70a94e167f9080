"""Shared helpers for randomized property tests."""
import numpy as np

from bigs import build_graph
from bigs.design import Srswor


def random_graph(rng: np.random.Generator, max_units: int = 6, max_motifs: int = 5):
    """Small random population graph with integer values; every motif gets
    at least one ancestor."""
    M = int(rng.integers(2, max_units + 1))
    N = int(rng.integers(1, max_motifs + 1))
    units = [f"u{i}" for i in range(M)]
    motifs = [(f"m{j}", int(rng.integers(0, 7))) for j in range(N)]
    edges = set()
    for j in range(N):
        anc = rng.choice(M, size=int(rng.integers(1, M + 1)), replace=False)
        for i in anc:
            edges.add((units[int(i)], f"m{j}"))
    return build_graph(units, motifs, sorted(edges))


def random_srswor(rng: np.random.Generator, graph) -> Srswor:
    m = int(rng.integers(1, graph.num_units + 1))
    return Srswor(graph.units, m)
