"""Population and sample bipartite incidence graphs.

A bipartite incidence graph links sampling units (the frame) to the motifs
they reveal: selecting a unit exposes every incident motif, and for each
exposed motif the complete set of units that could have revealed it (its
ancestors) is also recorded.  That ancestral knowledge is what makes
design-based weighting of observed motifs possible.

Unit order in the frame is significant: priority rules break ties by frame
enumeration, so ``units`` is an ordered sequence rather than a set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ValidationError

Num = int | float | Fraction


def _check_value(motif: str, y: object) -> Num:
    if isinstance(y, bool) or not isinstance(y, (int, float, Fraction)):
        raise ValidationError(f"motif {motif!r}: value must be a real number, got {y!r}")
    if isinstance(y, float) and not math.isfinite(y):
        raise ValidationError(f"motif {motif!r}: value must be finite, got {y!r}")
    return y


class BipartiteIncidenceGraph:
    """Immutable bipartite incidence graph with precomputed adjacency.

    ``units`` is the ordered frame, ``motifs`` the measurement units of
    interest (each carrying a real value), and ``edges`` the incidence
    pairs (unit, motif).  Units may have zero successors; every motif must
    have at least one ancestor, otherwise no unbiased estimator of its
    contribution exists.
    """

    __slots__ = ("units", "motifs", "edges", "_y", "_unit_pos", "_motif_pos",
                 "_alpha", "_beta")

    def __init__(self, units: Sequence[str],
                 motifs: Iterable[str | tuple[str, Num]],
                 edges: Iterable[tuple[str, str]]):
        units = tuple(units)
        if len(set(units)) != len(units):
            raise ValidationError("duplicate unit ids in frame")

        motif_ids: list[str] = []
        y: dict[str, Num] = {}
        for entry in motifs:
            if isinstance(entry, tuple):
                mid, val = entry
            else:
                mid, val = entry, 1
            if mid in y:
                raise ValidationError(f"duplicate motif id {mid!r}")
            motif_ids.append(mid)
            y[mid] = _check_value(mid, val)

        unit_pos = {u: i for i, u in enumerate(units)}
        motif_pos = {k: i for i, k in enumerate(motif_ids)}

        edge_list: list[tuple[str, str]] = []
        seen: set[tuple[str, str]] = set()
        alpha: list[list[int]] = [[] for _ in units]
        beta: list[list[int]] = [[] for _ in motif_ids]
        for u, k in edges:
            if u not in unit_pos:
                raise ValidationError(f"edge ({u!r}, {k!r}) references unknown unit {u!r}")
            if k not in motif_pos:
                raise ValidationError(f"edge ({u!r}, {k!r}) references unknown motif {k!r}")
            if (u, k) in seen:
                raise ValidationError(f"duplicate edge ({u!r}, {k!r})")
            seen.add((u, k))
            edge_list.append((u, k))
            alpha[unit_pos[u]].append(motif_pos[k])
            beta[motif_pos[k]].append(unit_pos[u])

        for mi, anc in enumerate(beta):
            if not anc:
                raise ValidationError(
                    f"unestimable motif {motif_ids[mi]!r}: no incident units")

        self.units = units
        self.motifs = tuple(motif_ids)
        self.edges = tuple(edge_list)
        self._y = y
        self._unit_pos = unit_pos
        self._motif_pos = motif_pos
        self._alpha = tuple(tuple(sorted(a)) for a in alpha)
        self._beta = tuple(tuple(sorted(b)) for b in beta)

    # -- basic accessors -------------------------------------------------

    @property
    def num_units(self) -> int:
        return len(self.units)

    @property
    def num_motifs(self) -> int:
        return len(self.motifs)

    def y_value(self, motif: str) -> Num:
        return self._y[motif]

    @property
    def y_total(self) -> Num:
        """Population total of the motif values."""
        return sum(self._y.values())

    def successors(self, unit: str) -> tuple[str, ...]:
        """Motifs revealed by sampling ``unit``."""
        return tuple(self.motifs[m] for m in self._alpha[self._unit_pos[unit]])

    def ancestors(self, motif: str) -> tuple[str, ...]:
        """Units whose selection reveals ``motif``, in frame order."""
        return tuple(self.units[u] for u in self._beta[self._motif_pos[motif]])

    def unit_degree(self, unit: str) -> int:
        return len(self._alpha[self._unit_pos[unit]])

    def multiplicity(self, motif: str) -> int:
        return len(self._beta[self._motif_pos[motif]])

    # Dense-index adjacency for enumeration and simulation hot paths.
    @property
    def successor_indexes(self) -> tuple[tuple[int, ...], ...]:
        return self._alpha

    @property
    def ancestor_indexes(self) -> tuple[tuple[int, ...], ...]:
        return self._beta

    def unit_position(self, unit: str) -> int:
        return self._unit_pos[unit]

    def motif_position(self, motif: str) -> int:
        return self._motif_pos[motif]

    def __repr__(self) -> str:
        return (f"BipartiteIncidenceGraph(units={len(self.units)}, "
                f"motifs={len(self.motifs)}, edges={len(self.edges)})")


def build_graph(units: Sequence[str],
                motifs: Iterable[str | tuple[str, Num]],
                edges: Iterable[tuple[str, str]]) -> BipartiteIncidenceGraph:
    """Validate and build a population graph; motif values default to 1."""
    return BipartiteIncidenceGraph(units, motifs, edges)


@dataclass(frozen=True)
class SampleBIG:
    """Observed sample graph plus ancestral knowledge.

    ``ancestry`` maps every sampled motif to its complete ancestor set in
    the population graph (including out-of-sample units), and
    ``ancestor_degrees`` records the successor count of every such
    ancestor.  ``draws`` is set when the sample arose from a sequence of
    independent draws; each entry is the unit set selected on that draw.
    """

    s: frozenset[str]
    sample_motifs: frozenset[str]
    sample_edges: frozenset[tuple[str, str]]
    ancestry: Mapping[str, frozenset[str]]
    ancestor_degrees: Mapping[str, int]
    y: Mapping[str, Num]
    draws: tuple[frozenset[str], ...] | None = None

    @property
    def observed_ancestors(self) -> frozenset[str]:
        """All ancestors of sampled motifs, in or out of the sample."""
        out: set[str] = set()
        for anc in self.ancestry.values():
            out |= anc
        return frozenset(out)


def observe(graph: BipartiteIncidenceGraph, s: Iterable[str]) -> SampleBIG:
    """Incident-ancestral observation of the initial sample ``s``.

    Reveals every motif incident to a sampled unit, the sample edges, the
    full ancestor set of each revealed motif and the successor counts of
    those ancestors.  Nothing outside the union of the sampled units'
    successors is exposed.
    """
    s = frozenset(s)
    for u in s:
        if u not in graph._unit_pos:
            raise ValidationError(f"sample contains unknown unit {u!r}")
    motifs: set[str] = set()
    edges: set[tuple[str, str]] = set()
    for u in s:
        for k in graph.successors(u):
            motifs.add(k)
            edges.add((u, k))
    ancestry = {k: frozenset(graph.ancestors(k)) for k in motifs}
    degrees: dict[str, int] = {}
    for anc in ancestry.values():
        for u in anc:
            degrees[u] = graph.unit_degree(u)
    return SampleBIG(
        s=s,
        sample_motifs=frozenset(motifs),
        sample_edges=frozenset(edges),
        ancestry=ancestry,
        ancestor_degrees=degrees,
        y={k: graph.y_value(k) for k in motifs},
    )


def observe_draws(graph: BipartiteIncidenceGraph,
                  draws: Iterable[Iterable[str] | str]) -> SampleBIG:
    """Observe a draw-structured sample (one unit set per draw)."""
    draw_sets = tuple(
        frozenset([d]) if isinstance(d, str) else frozenset(d) for d in draws)
    union: set[str] = set()
    for d in draw_sets:
        union |= d
    base = observe(graph, union)
    return SampleBIG(
        s=base.s,
        sample_motifs=base.sample_motifs,
        sample_edges=base.sample_edges,
        ancestry=base.ancestry,
        ancestor_degrees=base.ancestor_degrees,
        y=base.y,
        draws=draw_sets,
    )


# -- JSON interchange ----------------------------------------------------

def graph_to_json(graph: BipartiteIncidenceGraph) -> dict:
    """Plain-dict form: units, motifs with values, edge pairs."""
    return {
        "units": list(graph.units),
        "motifs": [{"id": k, "y": _json_num(graph.y_value(k))} for k in graph.motifs],
        "edges": [[u, k] for u, k in graph.edges],
    }


def graph_from_json(data: Mapping) -> BipartiteIncidenceGraph:
    """Build a graph from the dict form produced by :func:`graph_to_json`."""
    try:
        units = data["units"]
        motif_entries = data["motifs"]
        edges = data["edges"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"graph JSON missing field: {exc}") from exc
    motifs = []
    for entry in motif_entries:
        if isinstance(entry, Mapping):
            if "id" not in entry:
                raise ValidationError(f"motif entry {entry!r} has no 'id'")
            motifs.append((entry["id"], entry.get("y", 1)))
        else:
            motifs.append(entry)
    pairs = []
    for e in edges:
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise ValidationError(f"edge entry {e!r} is not a [unit, motif] pair")
        pairs.append((e[0], e[1]))
    return build_graph(units, motifs, pairs)


def _json_num(v: Num):
    return float(v) if isinstance(v, Fraction) and v.denominator != 1 else (
        int(v) if isinstance(v, Fraction) else v)
