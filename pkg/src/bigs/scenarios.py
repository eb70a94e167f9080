"""Built-in worked-example fixtures and the synthetic graph generator."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .design import Design, IidDraws, Srswor
from .errors import ValidationError
from .graph import (BipartiteIncidenceGraph, SampleBIG, build_graph,
                    graph_to_json, observe, observe_draws)


@dataclass(frozen=True)
class Scenario:
    """A population graph with its sampling design and optional recorded
    observations and golden values."""

    name: str
    graph: BipartiteIncidenceGraph
    design: Design
    observed: Mapping | None = None
    expected: Mapping | None = None
    description: str = ""

    def observed_sample(self) -> SampleBIG:
        if not self.observed:
            raise ValidationError(f"scenario {self.name!r} has no recorded sample")
        return sample_from_spec(self.graph, self.observed)


def sample_from_spec(graph: BipartiteIncidenceGraph, spec: Mapping) -> SampleBIG:
    """Observe a sample described as ``{"s": [...]}`` or ``{"draws": [[...], ...]}``."""
    if "s" in spec:
        return observe(graph, spec["s"])
    if "draws" in spec:
        return observe_draws(graph, spec["draws"])
    raise ValidationError("sample spec needs either 's' or 'draws'")


def example1() -> Scenario:
    """Four units, three motifs, one shared-ancestor motif; SRS of size 2."""
    graph = build_graph(
        units=["i1", "i2", "i3", "i4"],
        motifs=[("k1", 1), ("k2", 1), ("k3", 1)],
        edges=[("i1", "k1"), ("i2", "k1"), ("i2", "k2"), ("i3", "k3")],
    )
    return Scenario(
        name="example1",
        graph=graph,
        design=Srswor(graph.units, 2),
        observed={"s": ["i1", "i3"]},
        expected={"theta": 3},
        description="Minimal shared-ancestor fixture; unit i4 has no successors.",
    )


def acs_thompson() -> Scenario:
    """Adaptive cluster sampling of 5 grids, recast as incidence sampling.

    Each grid reveals its own plot; the two above-threshold grids also
    reveal each other's plots.  The links that would let the edge unit
    (grid 3) reveal its neighbours are absent, which is what makes the
    observation ancestral.
    """
    y = (1, 0, 2, 10, 1000)
    units = [f"grid{i}" for i in range(1, 6)]
    motifs = [(f"m{i}", y[i - 1]) for i in range(1, 6)]
    edges = [(f"grid{i}", f"m{i}") for i in range(1, 6)]
    edges += [("grid4", "m5"), ("grid5", "m4")]
    graph = build_graph(units, motifs, edges)
    return Scenario(
        name="acs",
        graph=graph,
        design=Srswor(graph.units, 2),
        observed={"s": ["grid3", "grid4"]},
        expected={"theta": 1013, "multiplicity_z": [1, 0, 2, 505, 505]},
        description="Five grids with values (1, 0, 2, 10, 1000); SRS of 2 grids.",
    )


def becker_lis() -> Scenario:
    """Wolverine line-intercept survey: 7 projection segments, 4 tracks.

    Selection probabilities are segment length over the 12-mile spacing of
    the systematic positions; four recorded draws.  The gaps between track
    projections (segments 3, 5, 7) never reveal anything, so their exact
    lengths are arbitrary positive values closing the 36-mile baseline.
    Joint exclusions for the track pairs whose projections overlap in
    offset space are supplied directly: (k3, k4) because track 3's span is
    nested in track 4's, (k2, k4) because together they cover every offset,
    and (k1, k4) from the mapped geometry.
    """
    units = [str(i) for i in range(1, 8)]
    motifs = [("k1", 1), ("k2", 2), ("k3", 2), ("k4", 1)]
    edges = [("1", "k1"), ("1", "k2"), ("2", "k2"), ("4", "k3"), ("6", "k4")]
    graph = build_graph(units, motifs, edges)
    lengths = {
        "1": Fraction(21, 4),   # 5.25, shared projection of tracks 1 and 2
        "2": Fraction(9, 4),    # 2.25, track 2 only
        "3": Fraction(6),       # gap (free choice)
        "4": Fraction(12, 5),   # 2.40, track 3
        "5": Fraction(6),       # gap (free choice)
        "6": Fraction(141, 20),  # 7.05, track 4
        "7": Fraction(141, 20),  # gap to the border (free choice)
    }
    assert sum(lengths.values()) == 36
    p = {u: q / 12 for u, q in lengths.items()}
    design = IidDraws(
        units, n=4, p=p,
        joint_exclusion_override=[
            ("k1", "k4", Fraction("0.009067")),
            ("k2", "k4", Fraction(0)),
            ("k3", "k4", (1 - p["6"]) ** 4),
        ],
    )
    return Scenario(
        name="becker_lis",
        graph=graph,
        design=design,
        observed={"draws": [["1", "5", "6"], ["1", "5", "6"],
                            ["4", "6", "7"], ["4", "6", "7"]]},
        expected={
            "theta": 6,
            "points": {"ht": 7.57, "hh:pida:0": 9.44,
                       "hh:multiplicity": 8.99, "hh:pida:0.5": 9.27},
            # The printed HT variance 5.27 is not reproducible from any
            # standard estimator with the published probabilities and is
            # deliberately not asserted anywhere.
            "hh_variances": {"hh:pida:0": 1.70, "hh:multiplicity": 2.46,
                             "hh:pida:0.5": 1.97},
        },
        description="Four systematic line-intercept draws over a 36-mile baseline.",
    )


def synthetic_bigraph(num_units: int, num_motifs: int, num_edges: int,
                      degree_profile: str = "uniform", seed: int = 0) -> Scenario:
    """Random population graph with a controlled successor-degree shape.

    Unit out-degrees are drawn from the requested profile ("uniform": a
    tight band around the mean; "skewed": heavy-tailed), scaled to sum to
    exactly ``num_edges``; each unit's edges then go to distinct uniform
    motifs, and motifs left without ancestors are repaired by moving edges
    away from multi-ancestor motifs, which preserves both the edge count
    and the out-degree profile.  Deterministic for a given seed.
    """
    M, N, E = num_units, num_motifs, num_edges
    if M < 1 or N < 1:
        raise ValidationError("need at least one unit and one motif")
    if E < N:
        raise ValidationError(f"{E} edges cannot give all {N} motifs an ancestor")
    if E > M * N:
        raise ValidationError(f"{E} distinct edges do not fit in a {M}x{N} graph")
    if degree_profile not in ("uniform", "skewed"):
        raise ValidationError(f"unknown degree profile {degree_profile!r}")

    rng = np.random.default_rng(seed)
    mean = E / M
    if degree_profile == "uniform":
        lo = max(0, int(np.floor(0.7 * mean)))
        hi = min(N, max(lo + 1, int(np.ceil(1.3 * mean))))
        deg = rng.integers(lo, hi + 1, size=M)
    else:
        raw = rng.lognormal(mean=0.0, sigma=1.1, size=M)
        deg = np.rint(raw * (E / raw.sum())).astype(int)
    deg = np.clip(deg, 0, N)
    # Nudge random entries until the degrees sum to exactly E.
    diff = E - int(deg.sum())
    while diff != 0:
        i = int(rng.integers(M))
        if diff > 0 and deg[i] < N:
            deg[i] += 1
            diff -= 1
        elif diff < 0 and deg[i] > 0:
            deg[i] -= 1
            diff += 1

    targets = [rng.choice(N, size=int(d), replace=False) for d in deg]
    succ = [set(int(k) for k in t) for t in targets]
    anc_count = np.zeros(N, dtype=int)
    for s in succ:
        for k in s:
            anc_count[k] += 1

    edge_pool = [(i, k) for i, s in enumerate(succ) for k in sorted(s)]
    for k_empty in range(N):
        if anc_count[k_empty] > 0:
            continue
        while True:
            i, k_from = edge_pool[int(rng.integers(len(edge_pool)))]
            if anc_count[k_from] >= 2 and k_from in succ[i]:
                break
        succ[i].remove(k_from)
        succ[i].add(k_empty)
        anc_count[k_from] -= 1
        anc_count[k_empty] += 1
        edge_pool = [(i, k) for i, s in enumerate(succ) for k in sorted(s)]

    width_u = len(str(M))
    width_m = len(str(N))
    units = [f"u{str(i + 1).zfill(width_u)}" for i in range(M)]
    motifs = [f"m{str(k + 1).zfill(width_m)}" for k in range(N)]
    edges = [(units[i], motifs[k]) for i, s in enumerate(succ) for k in sorted(s)]
    graph = build_graph(units, motifs, edges)
    return Scenario(
        name=f"synthetic:{M},{N},{E},{degree_profile},{seed}",
        graph=graph,
        design=Srswor(graph.units, min(2, M)),
        description=f"Synthetic {degree_profile}-degree graph, seed {seed}.",
    )


BUILTIN_SCENARIOS = {
    "example1": example1,
    "acs": acs_thompson,
    "becker_lis": becker_lis,
}


def scenario_names() -> list[str]:
    return sorted(BUILTIN_SCENARIOS) + ["synthetic:M,N,E,profile,seed"]


def get_scenario(name: str) -> Scenario:
    """Look up a built-in scenario, or build a synthetic one from
    ``synthetic:M,N,E,profile,seed``."""
    if name in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[name]()
    if name.startswith("synthetic:"):
        body = name[len("synthetic:"):]
        parts = [p.strip() for p in body.split(",")]
        if len(parts) != 5:
            raise ValidationError(
                "synthetic scenario needs synthetic:M,N,E,profile,seed")
        try:
            m, n, e = int(parts[0]), int(parts[1]), int(parts[2])
            seed = int(parts[4])
        except ValueError as exc:
            raise ValidationError(f"bad synthetic scenario {name!r}: {exc}") from exc
        return synthetic_bigraph(m, n, e, parts[3], seed)
    raise ValidationError(f"unknown scenario {name!r}; known: {', '.join(scenario_names())}")


def scenario_to_json(sc: Scenario) -> dict:
    out = {
        "name": sc.name,
        "graph": graph_to_json(sc.graph),
        "design": sc.design.to_json(),
    }
    if sc.observed is not None:
        out["observed"] = {key: [list(v) if not isinstance(v, str) else v
                                 for v in value]
                           for key, value in sc.observed.items()}
    if sc.description:
        out["description"] = sc.description
    return out
