"""Incidence weight schemes and the priority-rule machinery.

A weight scheme assigns a weight to every (unit, motif) edge.  Constant
schemes (multiplicity, PIDA, custom tables) do not depend on the realized
sample and are unbiased exactly when the weights over each motif's
ancestors sum to 1.  Sample-dependent schemes (the HT share rule, the
priority rule) satisfy the same condition in conditional expectation.

PIDA weights are proportional to q_i / |alpha_i|**gamma over each motif's
ancestors, where q_i is the unit inclusion probability (subset designs) or
the single-draw selection probability (draw designs).  For non-integer
gamma the unnormalized weights are computed in floating point and snapped
to exact rationals before normalizing, so the per-motif sums are exactly 1
and enumeration-based unbiasedness checks remain exact equalities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .design import Design, IidDraws, Srswor, as_fraction
from .errors import ValidationError
from .graph import BipartiteIncidenceGraph, SampleBIG

Edge = tuple[str, str]


@dataclass(frozen=True)
class Multiplicity:
    """Equal weights 1/|beta| over each motif's ancestors."""


@dataclass(frozen=True)
class Pida:
    """Probability and inverse-degree adjusted weights with tuning exponent gamma."""

    gamma: object = 0

    def gamma_fraction(self) -> Fraction:
        return as_fraction(self.gamma)


@dataclass(frozen=True, eq=False)
class CustomWeights:
    """Arbitrary constant weights given as a (unit, motif) -> weight table."""

    table: Mapping[Edge, object]


@dataclass(frozen=True)
class HtShare:
    """Sample-dependent weights that split each motif's HT mass over the
    realized ancestor intersection."""


@dataclass(frozen=True)
class PriorityRule:
    """One prioritized edge per sampled motif: the sampled ancestor that
    comes first in ``ordering``, reweighted by its prioritization probability."""

    ordering: tuple[str, ...]
    base: Multiplicity | Pida | CustomWeights = field(default_factory=Multiplicity)


ConstantScheme = Multiplicity | Pida | CustomWeights
WeightScheme = ConstantScheme | HtShare | PriorityRule


def resolve_ordering(graph: BipartiteIncidenceGraph, spec,
                     seed: int | None = None) -> tuple[str, ...]:
    """Turn an ordering description into an explicit frame permutation.

    ``spec`` is one of "natural", "ascending", "descending" (by successor
    count, frame order breaking ties), "random" (seeded shuffle), or an
    explicit permutation of the frame.
    """
    units = graph.units
    if isinstance(spec, str):
        if spec == "natural":
            return units
        if spec == "ascending":
            return tuple(sorted(units, key=lambda u: (graph.unit_degree(u),
                                                      graph.unit_position(u))))
        if spec == "descending":
            return tuple(sorted(units, key=lambda u: (-graph.unit_degree(u),
                                                      graph.unit_position(u))))
        if spec == "random":
            rng = np.random.default_rng(0 if seed is None else seed)
            return tuple(units[i] for i in rng.permutation(len(units)))
        raise ValidationError(f"unknown ordering {spec!r}")
    ordering = tuple(spec)
    if sorted(ordering) != sorted(units):
        raise ValidationError("ordering is not a permutation of the frame")
    return ordering


def _rank_map(ordering: Sequence[str]) -> dict[str, int]:
    return {u: r for r, u in enumerate(ordering)}


def _scope(source: BipartiteIncidenceGraph | SampleBIG):
    """Motifs, ancestry and ancestor degrees of a graph or a sample."""
    if isinstance(source, SampleBIG):
        motifs = sorted(source.sample_motifs)
        ancestry = {k: sorted(source.ancestry[k]) for k in motifs}
        degrees = source.ancestor_degrees
    else:
        motifs = list(source.motifs)
        ancestry = {k: list(source.ancestors(k)) for k in motifs}
        degrees = {u: source.unit_degree(u) for u in source.units}
    return motifs, ancestry, degrees


def _selection_prob(design: Design, unit: str) -> Fraction:
    if isinstance(design, IidDraws):
        return design.p[unit]
    return design.unit_inclusion_prob(unit)


def constant_weights(source: BipartiteIncidenceGraph | SampleBIG,
                     scheme: ConstantScheme, design: Design | None = None,
                     validate: bool = True) -> dict[Edge, Fraction]:
    """Weight table of a constant scheme over all (ancestor, motif) pairs.

    The scope is every motif of ``source`` (all motifs of a population
    graph, or the sampled motifs of a sample, whose full ancestor sets are
    known by ancestral observation).  Weights are exact rationals whose
    per-motif sums equal 1; custom tables are checked for that unless
    ``validate`` is false.
    """
    motifs, ancestry, degrees = _scope(source)
    table: dict[Edge, Fraction] = {}
    if isinstance(scheme, Multiplicity):
        for k in motifs:
            anc = ancestry[k]
            w = Fraction(1, len(anc))
            for u in anc:
                table[(u, k)] = w
        return table
    if isinstance(scheme, Pida):
        if design is None:
            raise ValidationError("PIDA weights need the sampling design")
        gamma = scheme.gamma_fraction()
        for k in motifs:
            anc = ancestry[k]
            raw: list[Fraction] = []
            for u in anc:
                q = _selection_prob(design, u)
                if gamma == 0:
                    raw.append(q)
                    continue
                try:
                    deg = degrees[u]
                except KeyError:
                    raise ValidationError(
                        f"PIDA weights need the successor count of ancestor {u!r}")
                if gamma.denominator == 1:
                    raw.append(q / Fraction(deg) ** int(gamma))
                else:
                    raw.append(Fraction(float(q) / deg ** float(gamma)))
            total = sum(raw)
            for u, r in zip(anc, raw):
                table[(u, k)] = r / total
        return table
    if isinstance(scheme, CustomWeights):
        for k in motifs:
            anc = ancestry[k]
            total = Fraction(0)
            for u in anc:
                if (u, k) not in scheme.table:
                    raise ValidationError(f"custom table has no weight for edge ({u!r}, {k!r})")
                w = as_fraction(scheme.table[(u, k)])
                table[(u, k)] = w
                total += w
            if validate and abs(total - 1) > Fraction(1, 10 ** 12):
                raise ValidationError(
                    f"custom weights over motif {k!r} sum to {float(total):.12g}, not 1")
        return table
    raise ValidationError(f"not a constant weight scheme: {scheme!r}")


def ht_share_weights(sample: SampleBIG, design: Design) -> dict[Edge, Fraction]:
    """Sample-dependent weights splitting each motif's HT mass equally over
    the realized sample-ancestor intersection.

    Pushing these weights through the incidence-weighted estimator
    reproduces the HT estimator exactly on every sample.
    """
    table: dict[Edge, Fraction] = {}
    for k in sorted(sample.sample_motifs):
        anc = sample.ancestry[k]
        hit = sorted(anc & sample.s)
        pi_k = design.motif_inclusion_prob(anc)
        for u in hit:
            table[(u, k)] = design.unit_inclusion_prob(u) / (len(hit) * pi_k)
    return table


def priority_indicator(sample: SampleBIG, ordering: Sequence[str]) -> dict[str, str]:
    """The prioritized ancestor of each sampled motif: first in ``ordering``
    among the motif's sampled ancestors."""
    rank = _rank_map(ordering)
    out: dict[str, str] = {}
    for k in sample.sample_motifs:
        hit = sample.ancestry[k] & sample.s
        try:
            out[k] = min(hit, key=lambda u: rank[u])
        except KeyError as exc:
            raise ValidationError(f"ordering does not cover unit {exc}") from exc
    return out


def _require_srswor(design: Design) -> Srswor:
    if not isinstance(design, Srswor):
        raise ValidationError("priority probabilities are defined for simple random sampling only")
    return design


def priority_prob(design: Design, ancestors: Iterable[str], unit: str,
                  ordering: Sequence[str]) -> Fraction:
    """Probability that ``unit`` is the prioritized ancestor of a motif with
    the given ancestor set, conditional on the unit being sampled.

    Zero when so many higher-priority ancestors exist that at least one is
    always sampled alongside the unit; a zero here means the priority-rule
    estimator is biased.
    """
    d = _require_srswor(design)
    rank = _rank_map(ordering)
    ahead = sum(1 for j in ancestors if j != unit and rank[j] < rank[unit])
    M, m = d.num_units, d.m
    if M - 1 - ahead < m - 1:
        return Fraction(0)
    return Fraction(math.comb(M - 1 - ahead, m - 1), math.comb(M - 1, m - 1))


def joint_priority_prob(design: Design, i: str, kappa: str, j: str, ell: str,
                        ancestry: Mapping[str, Iterable[str]],
                        ordering: Sequence[str]) -> Fraction:
    """Probability that edges (i, kappa) and (j, ell) are both prioritized,
    conditional on both units being sampled."""
    d = _require_srswor(design)
    rank = _rank_map(ordering)
    beta_k = set(ancestry[kappa])
    beta_l = set(ancestry[ell])

    def ahead_of(unit, anc):
        return {u for u in anc if u != unit and rank[u] < rank[unit]}

    if kappa == ell:
        if i == j:
            return priority_prob(d, beta_k, i, ordering)
        return Fraction(0)
    M, m = d.num_units, d.m
    if i == j:
        blockers = ahead_of(i, beta_k) | ahead_of(i, beta_l)
        if M - 1 - len(blockers) < m - 1:
            return Fraction(0)
        return Fraction(math.comb(M - 1 - len(blockers), m - 1),
                        math.comb(M - 1, m - 1))
    if m < 2:
        raise ValidationError("joint prioritization of distinct units needs m >= 2")
    ahead_i = ahead_of(i, beta_k)
    ahead_j = ahead_of(j, beta_l)
    if j in ahead_i or i in ahead_j:
        return Fraction(0)
    blockers = ahead_i | ahead_j
    if M - 2 - len(blockers) < m - 2:
        return Fraction(0)
    return Fraction(math.comb(M - 2 - len(blockers), m - 2),
                    math.comb(M - 2, m - 2))
