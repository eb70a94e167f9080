"""Point estimators, variances and the unbiasedness-condition checker.

Every estimator here is an incidence weighting estimator: a weighted sum
of motif values over sample edges, with each edge weight divided by the
inclusion probability of its unit.  The choice of weights gives the HT
estimator (sample-dependent share weights), the HH family (constant
weights: multiplicity, PIDA, custom) and the priority-rule estimator.

Under a draw-structured design the HH-type estimators are evaluated per
draw with the single-draw selection probabilities and averaged over draws;
under subset sampling they are evaluated once with the unit inclusion
probabilities.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .design import Design, IidDraws, Srswor, as_fraction
from .errors import ValidationError
from .graph import BipartiteIncidenceGraph, SampleBIG
from .weights import (ConstantScheme, CustomWeights, Edge, HtShare,
                      Multiplicity, Pida, PriorityRule, constant_weights,
                      ht_share_weights, joint_priority_prob,
                      priority_indicator, priority_prob, resolve_ordering)


def z_values(sample: SampleBIG, weights: Mapping[Edge, object]) -> dict[str, object]:
    """Per-unit constructed values: weighted sum of incident motif values."""
    z: dict[str, object] = {}
    for u, k in sorted(sample.sample_edges):
        try:
            w = weights[(u, k)]
        except KeyError:
            raise ValidationError(f"no weight for sample edge ({u!r}, {k!r})")
        z[u] = z.get(u, 0) + w * sample.y[k]
    return z


def hh_per_draw_estimates(sample: SampleBIG, design: IidDraws,
                          weights: Mapping[Edge, object]) -> list:
    """Single-draw totals z_i / p_i summed over each draw's selected units."""
    if sample.draws is None:
        raise ValidationError("per-draw estimates need a draw-structured sample")
    z = z_values(sample, weights)
    return [sum(z.get(u, 0) / design.p[u] for u in sorted(d)) for d in sample.draws]


def hh_point_estimate(sample: SampleBIG, design: Design,
                      weights: Mapping[Edge, object]):
    """HH-type estimate with constant weights.

    Subset designs: sum of z_i over sampled units, inverse-inclusion
    weighted.  Draw designs: mean of the per-draw totals, so units selected
    on several draws contribute once per draw.
    """
    if isinstance(design, IidDraws):
        taus = hh_per_draw_estimates(sample, design, weights)
        return sum(taus) / len(taus)
    z = z_values(sample, weights)
    return sum(z[u] / design.unit_inclusion_prob(u) for u in sorted(z))


def ht_point_estimate(sample: SampleBIG, design: Design):
    """Sum of motif values over distinct sampled motifs, inverse-inclusion weighted."""
    total = 0
    for k in sorted(sample.sample_motifs):
        pi_k = design.motif_inclusion_prob(sample.ancestry[k])
        total += sample.y[k] / pi_k
    return total


def iwe_point_estimate(sample: SampleBIG, design: Design,
                       weights: Mapping[Edge, object]):
    """Generic incidence weighting estimator over the sample edges."""
    total = 0
    for u, k in sorted(sample.sample_edges):
        if (u, k) in weights:
            total += weights[(u, k)] * sample.y[k] / design.unit_inclusion_prob(u)
    return total


def priority_point_estimate(sample: SampleBIG, design: Design,
                            ordering: Sequence[str],
                            scheme: ConstantScheme | None = None):
    """Priority-rule estimate: one reweighted edge per sampled motif."""
    scheme = scheme if scheme is not None else Multiplicity()
    omega = constant_weights(sample, scheme, design)
    chosen = priority_indicator(sample, ordering)
    total = 0
    for k in sorted(chosen):
        u = chosen[k]
        p = priority_prob(design, sample.ancestry[k], u, ordering)
        if p == 0:
            # Unreachable under SRS: a realized prioritized unit always has
            # all higher-priority ancestors out of the sample.
            raise RuntimeError(f"prioritized edge ({u!r}, {k!r}) has zero prioritization probability")
        total += omega[(u, k)] * sample.y[k] / (p * design.unit_inclusion_prob(u))
    return total


# -- variance estimators ---------------------------------------------------

def ht_variance_estimator(sample: SampleBIG, design: Design):
    """HT-form variance estimator on the observed motif totals.

    Uses motif-level inclusion probabilities; treat the result with care
    for draw designs with overridden joint exclusions, where no variance
    estimator is pinned down by the design alone.
    """
    ks = sorted(sample.sample_motifs)
    total = 0
    for a, ka in enumerate(ks):
        pi_a = design.motif_inclusion_prob(sample.ancestry[ka])
        total += (1 - pi_a) / pi_a ** 2 * sample.y[ka] ** 2
        for kb in ks[a + 1:]:
            pi_b = design.motif_inclusion_prob(sample.ancestry[kb])
            pi_ab = design.joint_motif_inclusion_prob(
                sample.ancestry[ka], sample.ancestry[kb], pair=(ka, kb))
            if pi_ab == 0:
                raise ValidationError(
                    f"joint inclusion of observed motifs {ka!r}, {kb!r} is zero")
            term = (pi_ab - pi_a * pi_b) / (pi_ab * pi_a * pi_b)
            total += 2 * term * sample.y[ka] * sample.y[kb]
    return total


def hh_variance_estimator(sample: SampleBIG, design: Design,
                          weights: Mapping[Edge, object]):
    """Variance estimator for the HH-type estimate.

    Draw designs use the between-draw estimator; subset designs use the
    HT-form estimator on the constructed z values.  May be negative for
    some designs; callers flag rather than clamp.
    """
    if isinstance(design, IidDraws):
        taus = hh_per_draw_estimates(sample, design, weights)
        n = len(taus)
        if n < 2:
            raise ValidationError("between-draw variance estimation needs at least 2 draws")
        mean = sum(taus) / n
        return sum((t - mean) ** 2 for t in taus) / (n * (n - 1))
    z = z_values(sample, weights)
    units = sorted(z)
    total = 0
    for a, ua in enumerate(units):
        pi_a = design.unit_inclusion_prob(ua)
        total += (1 - pi_a) / pi_a ** 2 * z[ua] ** 2
        for ub in units[a + 1:]:
            pi_b = design.unit_inclusion_prob(ub)
            pi_ab = design.joint_unit_inclusion_prob(ua, ub)
            if pi_ab == 0:
                raise ValidationError(
                    f"joint inclusion of sampled units {ua!r}, {ub!r} is zero")
            term = (pi_ab - pi_a * pi_b) / (pi_ab * pi_a * pi_b)
            total += 2 * term * z[ua] * z[ub]
    return total


def priority_variance_estimator(sample: SampleBIG, design: Design,
                                ordering: Sequence[str],
                                scheme: ConstantScheme | None = None):
    """Unbiased variance estimator of the priority-rule estimate, summed
    over all pairs of sample edges."""
    scheme = scheme if scheme is not None else Multiplicity()
    omega = constant_weights(sample, scheme, design)
    edges = sorted(sample.sample_edges)
    p_edge: dict[Edge, Fraction] = {}
    for u, k in edges:
        p = priority_prob(design, sample.ancestry[k], u, ordering)
        if p == 0:
            raise ValidationError(
                f"sample edge ({u!r}, {k!r}) can never be prioritized; "
                "the priority-rule estimator is biased here")
        p_edge[(u, k)] = p
    total = 0
    for i, ka in edges:
        for j, kb in edges:
            p_joint = joint_priority_prob(design, i, ka, j, kb,
                                          sample.ancestry, ordering)
            pi_i = design.unit_inclusion_prob(i)
            pi_j = design.unit_inclusion_prob(j)
            pi_ij = design.joint_unit_inclusion_prob(i, j)
            factor = (pi_ij * p_joint) / (pi_i * pi_j * p_edge[(i, ka)] * p_edge[(j, kb)])
            total += ((factor - 1) * omega[(i, ka)] * omega[(j, kb)]
                      * sample.y[ka] * sample.y[kb] / pi_ij)
    return total


# -- true variances --------------------------------------------------------

def iwe_true_variance(graph: BipartiteIncidenceGraph, design: Design,
                      scheme) -> object:
    """Closed-form sampling variance of an unbiased estimator.

    ``scheme`` selects the estimator: :class:`HtShare` for the HT
    estimator, a constant scheme for the HH family, or
    :class:`PriorityRule` for the priority-rule estimator (subset sampling
    only, and only while every edge has positive prioritization
    probability).  Requires the full population graph.
    """
    if isinstance(scheme, HtShare):
        return _ht_true_variance(graph, design)
    if isinstance(scheme, PriorityRule):
        return _priority_true_variance(graph, design, scheme)
    if isinstance(scheme, (Multiplicity, Pida, CustomWeights)):
        return _hh_true_variance(graph, design, scheme)
    raise ValidationError(f"no variance formula for scheme {scheme!r}")


def _ht_true_variance(graph, design):
    ks = list(graph.motifs)
    total = 0
    for a, ka in enumerate(ks):
        anc_a = graph.ancestors(ka)
        pi_a = design.motif_inclusion_prob(anc_a)
        total += (1 / pi_a - 1) * graph.y_value(ka) ** 2
        for kb in ks[a + 1:]:
            anc_b = graph.ancestors(kb)
            pi_b = design.motif_inclusion_prob(anc_b)
            pi_ab = design.joint_motif_inclusion_prob(anc_a, anc_b, pair=(ka, kb))
            total += 2 * (pi_ab / (pi_a * pi_b) - 1) * graph.y_value(ka) * graph.y_value(kb)
    return total


def _hh_true_variance(graph, design, scheme):
    table = constant_weights(graph, scheme, design)
    z: dict[str, object] = {}
    for u, k in graph.edges:
        z[u] = z.get(u, 0) + table[(u, k)] * graph.y_value(k)
    if isinstance(design, IidDraws):
        theta = graph.y_total
        second = sum(val ** 2 / design.p[u] for u, val in z.items())
        return (second - theta ** 2) / design.n
    units = sorted(z)
    total = 0
    for a, ua in enumerate(units):
        pi_a = design.unit_inclusion_prob(ua)
        total += (1 / pi_a - 1) * z[ua] ** 2
        for ub in units[a + 1:]:
            pi_b = design.unit_inclusion_prob(ub)
            pi_ab = design.joint_unit_inclusion_prob(ua, ub)
            total += 2 * (pi_ab / (pi_a * pi_b) - 1) * z[ua] * z[ub]
    return total


def _priority_true_variance(graph, design, scheme: PriorityRule):
    ordering = scheme.ordering
    omega = constant_weights(graph, scheme.base, design)
    edges = list(graph.edges)
    ancestry = {k: graph.ancestors(k) for k in graph.motifs}
    p_edge: dict[Edge, Fraction] = {}
    blocked = []
    for u, k in edges:
        p = priority_prob(design, ancestry[k], u, ordering)
        if p == 0:
            blocked.append((k, u))
        p_edge[(u, k)] = p
    if blocked:
        raise ValidationError(
            f"priority-rule estimator is biased under this ordering; "
            f"blocked (motif, unit) pairs: {blocked!r}")
    total = 0
    for i, ka in edges:
        for j, kb in edges:
            p_joint = joint_priority_prob(design, i, ka, j, kb, ancestry, ordering)
            pi_i = design.unit_inclusion_prob(i)
            pi_j = design.unit_inclusion_prob(j)
            pi_ij = design.joint_unit_inclusion_prob(i, j)
            factor = (pi_ij * p_joint) / (pi_i * pi_j * p_edge[(i, ka)] * p_edge[(j, kb)])
            total += ((factor - 1) * omega[(i, ka)] * omega[(j, kb)]
                      * graph.y_value(ka) * graph.y_value(kb))
    return total


def condition_two_residual(graph: BipartiteIncidenceGraph, design: Design,
                           scheme, cap: int | None = None) -> dict[str, object]:
    """Per-motif residual of the unbiasedness condition.

    For each motif, the sum over its ancestors of the expected edge weight
    given the ancestor is sampled, minus 1.  All residuals zero is exactly
    the condition for the estimator to be design-unbiased.  Constant
    schemes are checked directly; sample-dependent schemes by exhaustive
    enumeration of the design.
    """
    from .design import DEFAULT_ENUM_CAP
    from .graph import observe, observe_draws
    if isinstance(scheme, (Multiplicity, Pida, CustomWeights)):
        table = constant_weights(graph, scheme, design, validate=False)
        out = {}
        for k in graph.motifs:
            out[k] = sum(table[(u, k)] for u in graph.ancestors(k)) - 1
        return out

    cap = DEFAULT_ENUM_CAP if cap is None else cap
    acc: dict[Edge, object] = {}
    for outcome, prob in design.enumerate_sample_space(cap):
        if isinstance(outcome, tuple):
            sample = observe_draws(graph, outcome)
        else:
            sample = observe(graph, outcome)
        if isinstance(scheme, HtShare):
            table = ht_share_weights(sample, design)
        elif isinstance(scheme, PriorityRule):
            omega = constant_weights(sample, scheme.base, design)
            table = {}
            for k, u in priority_indicator(sample, scheme.ordering).items():
                p = priority_prob(design, sample.ancestry[k], u, scheme.ordering)
                table[(u, k)] = omega[(u, k)] / p
        else:
            raise ValidationError(f"cannot check scheme {scheme!r}")
        for (u, k), w in table.items():
            acc[(u, k)] = acc.get((u, k), 0) + prob * w / design.unit_inclusion_prob(u)
    out = {}
    for k in graph.motifs:
        out[k] = sum(acc.get((u, k), 0) for u in graph.ancestors(k)) - 1
    return out


# -- estimator specifications and reports -----------------------------------

@dataclass(frozen=True)
class EstimatorSpec:
    """A named estimator with its parameters, resolvable against a graph
    and design."""

    kind: str  # "ht" | "ht_share" | "hh" | "priority"
    scheme: ConstantScheme | None = None
    ordering: object = "natural"
    ordering_seed: int | None = None

    @property
    def label(self) -> str:
        if self.kind == "hh":
            if isinstance(self.scheme, Pida):
                return f"hh:pida:{self.scheme.gamma}"
            if isinstance(self.scheme, CustomWeights):
                return "hh:custom"
            return "hh:multiplicity"
        if self.kind == "priority":
            name = self.ordering if isinstance(self.ordering, str) else "explicit"
            if name == "random" and self.ordering_seed is not None:
                return f"priority:random:{self.ordering_seed}"
            return f"priority:{name}"
        return self.kind

    @property
    def params(self) -> str:
        if self.kind == "hh":
            if isinstance(self.scheme, Pida):
                return f"gamma={self.scheme.gamma}"
            if isinstance(self.scheme, CustomWeights):
                return "custom"
            return "multiplicity"
        if self.kind == "priority":
            name = self.ordering if isinstance(self.ordering, str) else "explicit"
            if name == "random" and self.ordering_seed is not None:
                return f"order=random:{self.ordering_seed}"
            return f"order={name}"
        return ""

    @property
    def gamma(self) -> str:
        if self.kind == "hh" and isinstance(self.scheme, Pida):
            return str(self.scheme.gamma)
        return ""


def parse_estimator(text: str) -> EstimatorSpec:
    """Parse an estimator token such as ``ht``, ``hh:pida:0.5`` or
    ``priority:order=descending``."""
    token = text.strip()
    if not token:
        raise ValidationError("empty estimator name")
    parts = token.split(":")
    head = parts[0].lower()
    if head == "ht" and len(parts) == 1:
        return EstimatorSpec("ht")
    if head in ("ht_share", "htshare") and len(parts) == 1:
        return EstimatorSpec("ht_share")
    if head in ("hh", "multiplicity", "pida"):
        rest = parts[1:] if head == "hh" else [head] + parts[1:]
        if not rest or rest == ["multiplicity"] or rest == [""]:
            return EstimatorSpec("hh", scheme=Multiplicity())
        if rest[0] == "multiplicity" and len(rest) == 1:
            return EstimatorSpec("hh", scheme=Multiplicity())
        if rest[0] == "pida":
            if len(rest) == 1:
                return EstimatorSpec("hh", scheme=Pida(0))
            if len(rest) == 2:
                value = rest[1]
                if value.startswith("gamma="):
                    value = value[len("gamma="):]
                as_fraction(value)  # reject junk early
                return EstimatorSpec("hh", scheme=Pida(value))
        raise ValidationError(f"cannot parse estimator {text!r}")
    if head == "priority":
        ordering = "natural"
        seed = None
        if len(parts) > 1:
            rest = parts[1:]
            if rest[0].startswith("order="):
                rest[0] = rest[0][len("order="):]
            ordering = rest[0]
            if ordering not in ("natural", "ascending", "descending", "random"):
                raise ValidationError(f"unknown priority ordering {ordering!r}")
            if len(rest) == 2:
                if ordering != "random":
                    raise ValidationError(f"cannot parse estimator {text!r}")
                seed = int(rest[1])
            elif len(rest) > 2:
                raise ValidationError(f"cannot parse estimator {text!r}")
        return EstimatorSpec("priority", ordering=ordering, ordering_seed=seed)
    raise ValidationError(f"unknown estimator {text!r}")


def parse_estimator_list(text: str) -> tuple[EstimatorSpec, ...]:
    items = [t for t in (piece.strip() for piece in text.split(",")) if t]
    return tuple(parse_estimator(t) for t in items)


def _ordering_for(spec: EstimatorSpec, design: Design,
                  graph: BipartiteIncidenceGraph | None) -> tuple[str, ...]:
    if not isinstance(spec.ordering, str):
        return tuple(spec.ordering)
    if graph is not None:
        return resolve_ordering(graph, spec.ordering, spec.ordering_seed)
    if spec.ordering == "natural":
        return tuple(design.units)
    raise ValidationError(
        f"ordering {spec.ordering!r} needs the population graph to resolve")


def make_point_estimator(spec: EstimatorSpec, graph: BipartiteIncidenceGraph,
                         design: Design) -> Callable[[SampleBIG], object]:
    """Bind an estimator spec to a graph and design, returning a function
    of the observed sample."""
    if spec.kind == "ht":
        return lambda sample: ht_point_estimate(sample, design)
    if spec.kind == "ht_share":
        return lambda sample: iwe_point_estimate(
            sample, design, ht_share_weights(sample, design))
    if spec.kind == "hh":
        table = constant_weights(graph, spec.scheme or Multiplicity(), design)
        return lambda sample: hh_point_estimate(sample, design, table)
    if spec.kind == "priority":
        if not isinstance(design, Srswor):
            raise ValidationError("priority-rule estimator needs simple random sampling")
        ordering = _ordering_for(spec, design, graph)
        base = spec.scheme or Multiplicity()
        return lambda sample: priority_point_estimate(sample, design, ordering, base)
    raise ValidationError(f"unknown estimator kind {spec.kind!r}")


def scheme_for(spec: EstimatorSpec, graph: BipartiteIncidenceGraph | None,
               design: Design) -> WeightScheme:
    """The weight scheme realizing an estimator spec (for variance formulas)."""
    if spec.kind in ("ht", "ht_share"):
        return HtShare()
    if spec.kind == "hh":
        return spec.scheme or Multiplicity()
    if spec.kind == "priority":
        return PriorityRule(_ordering_for(spec, design, graph),
                            spec.scheme or Multiplicity())
    raise ValidationError(f"unknown estimator kind {spec.kind!r}")


@dataclass
class EstimateReport:
    """One estimator's result on one sample."""

    estimator: str
    point: object
    variance_estimate: object | None = None
    true_variance: object | None = None
    flags: tuple[str, ...] = ()
    diagnostics: dict = field(default_factory=dict)


def evaluate(spec: EstimatorSpec, sample: SampleBIG, design: Design,
             graph: BipartiteIncidenceGraph | None = None,
             with_true_variance: bool = False) -> EstimateReport:
    """Point estimate plus variance estimate and diagnostic flags."""
    flags: list[str] = []
    diagnostics: dict = {}
    if spec.kind in ("ht", "ht_share"):
        if spec.kind == "ht":
            point = ht_point_estimate(sample, design)
        else:
            point = iwe_point_estimate(sample, design, ht_share_weights(sample, design))
        var_est = ht_variance_estimator(sample, design)
    elif spec.kind == "hh":
        table = constant_weights(sample, spec.scheme or Multiplicity(), design)
        point = hh_point_estimate(sample, design, table)
        var_est = hh_variance_estimator(sample, design, table)
    elif spec.kind == "priority":
        if not isinstance(design, Srswor):
            raise ValidationError("priority-rule estimator needs simple random sampling")
        ordering = _ordering_for(spec, design, graph)
        base = spec.scheme or Multiplicity()
        point = priority_point_estimate(sample, design, ordering, base)
        var_est = priority_variance_estimator(sample, design, ordering, base)
        if graph is not None:
            from .exact import priority_support_check
            hazards = priority_support_check(graph, design, ordering)
            if hazards:
                flags.append("biased_priority")
                diagnostics["hazards"] = hazards
    else:
        raise ValidationError(f"unknown estimator kind {spec.kind!r}")

    if var_est is not None and var_est < 0:
        flags.append("negative_varest")
    true_var = None
    if with_true_variance:
        if graph is None:
            raise ValidationError("true variance needs the population graph")
        true_var = iwe_true_variance(graph, design, scheme_for(spec, graph, design))
    return EstimateReport(estimator=spec.label, point=point,
                          variance_estimate=var_est, true_variance=true_var,
                          flags=tuple(flags), diagnostics=diagnostics)
