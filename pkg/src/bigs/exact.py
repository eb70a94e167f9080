"""Exhaustive-enumeration oracle, Rao-Blackwellization and the
priority-rule bias detector.

Everything here works by enumerating the design's sample space exactly, in
rational arithmetic whenever the estimator values are rational, so
unbiasedness can be asserted as equality rather than to a tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .design import DEFAULT_ENUM_CAP, Design, Srswor
from .errors import UnreachableMotifSetError, ValidationError
from .graph import BipartiteIncidenceGraph, SampleBIG, observe, observe_draws
from .weights import priority_prob


@dataclass(frozen=True)
class ExactMoments:
    """Exact mean and variance of an estimator over a design's sample space."""

    mean: object
    variance: object
    per_sample: tuple[tuple[object, object, object], ...]


def _observe_outcome(graph: BipartiteIncidenceGraph, outcome) -> SampleBIG:
    if isinstance(outcome, tuple):
        return observe_draws(graph, outcome)
    return observe(graph, outcome)


def exact_moments(graph: BipartiteIncidenceGraph, design: Design,
                  estimator: Callable[[SampleBIG], object],
                  cap: int = DEFAULT_ENUM_CAP) -> ExactMoments:
    """Exact first and second moments of an estimator by full enumeration."""
    per_sample = []
    mean = 0
    for outcome, prob in design.enumerate_sample_space(cap):
        est = estimator(_observe_outcome(graph, outcome))
        per_sample.append((outcome, prob, est))
        mean = mean + prob * est
    variance = 0
    for _, prob, est in per_sample:
        dev = est - mean
        variance = variance + prob * dev * dev
    return ExactMoments(mean=mean, variance=variance, per_sample=tuple(per_sample))


def _motif_set(graph: BipartiteIncidenceGraph, outcome) -> frozenset[str]:
    units = set()
    if isinstance(outcome, tuple):
        for d in outcome:
            units |= d
    else:
        units = set(outcome)
    motifs: set[str] = set()
    for u in units:
        motifs.update(graph.successors(u))
    return frozenset(motifs)


def rao_blackwellize(graph: BipartiteIncidenceGraph, design: Design,
                     estimator: Callable[[SampleBIG], object],
                     observed_motifs: Iterable[str],
                     cap: int = DEFAULT_ENUM_CAP):
    """Expected estimate over all samples producing the observed motif set.

    The observed motif set is the minimal sufficient statistic here, so
    this is the Rao-Blackwellized value of the estimator.
    """
    target = frozenset(observed_motifs)
    num = 0
    den = 0
    for outcome, prob in design.enumerate_sample_space(cap):
        if _motif_set(graph, outcome) != target:
            continue
        num = num + prob * estimator(_observe_outcome(graph, outcome))
        den = den + prob
    if den == 0:
        raise UnreachableMotifSetError(
            f"no sample of the design produces motif set {sorted(target)!r}")
    return num / den


def rao_blackwell_moments(graph: BipartiteIncidenceGraph, design: Design,
                          estimator: Callable[[SampleBIG], object],
                          cap: int = DEFAULT_ENUM_CAP) -> ExactMoments:
    """Exact moments of the Rao-Blackwellized estimator.

    Groups the sample space by observed motif set, replaces each sample's
    estimate with its group's conditional mean, and returns the moments of
    the resulting estimator.
    """
    space = design.enumerate_sample_space(cap)
    groups: dict[frozenset[str], list[int]] = {}
    records = []
    for idx, (outcome, prob) in enumerate(space):
        est = estimator(_observe_outcome(graph, outcome))
        records.append([outcome, prob, est])
        groups.setdefault(_motif_set(graph, outcome), []).append(idx)
    for indexes in groups.values():
        den = sum(records[i][1] for i in indexes)
        num = sum(records[i][1] * records[i][2] for i in indexes)
        rb = num / den
        for i in indexes:
            records[i][2] = rb
    mean = sum(prob * est for _, prob, est in records)
    variance = sum(prob * (est - mean) ** 2 for _, prob, est in records)
    return ExactMoments(mean=mean, variance=variance,
                        per_sample=tuple(tuple(r) for r in records))


def priority_support_check(graph: BipartiteIncidenceGraph, design: Design,
                           ordering: Sequence[str]) -> list[tuple[str, str]]:
    """(motif, unit) pairs whose edge can never be prioritized.

    A non-empty list means the priority-rule estimator is biased under
    this ordering and sample size: those ancestors' weight mass never
    enters the estimate.  Only multi-ancestor motifs can be affected.
    """
    if not isinstance(design, Srswor):
        raise ValidationError("the priority support check applies to simple random sampling")
    hazards: list[tuple[str, str]] = []
    for k in graph.motifs:
        anc = graph.ancestors(k)
        if len(anc) < 2:
            continue
        for u in anc:
            if priority_prob(design, anc, u, ordering) == 0:
                hazards.append((k, u))
    return hazards
