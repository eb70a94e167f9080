"""Deterministic Monte Carlo harness for estimator efficiency tables.

Each replicate draws an initial sample, observes the sample graph and
evaluates every configured estimator on it; the empirical mean squared
error against the known population total gives relative efficiencies
versus the HT estimator on the same replicates.

Replicate r of sample-size block m uses the dedicated substream
``[master_seed, m, r]``, and per-block results are merged by exact
summation in replicate order, so output is byte-identical for a given
seed regardless of how replicates are distributed over workers.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .design import IidDraws, Srswor
from .errors import ValidationError
from .estimators import EstimatorSpec, make_point_estimator
from .graph import BipartiteIncidenceGraph, observe_draws
from .scenarios import Scenario
from .weights import Multiplicity, constant_weights, resolve_ordering

CSV_COLUMNS = ("scenario", "design", "m", "estimator", "params", "R", "seed",
               "mean", "mse", "rel_eff", "flags")


@dataclass(frozen=True)
class SimulationConfig:
    """What to simulate: scenario, estimators, sample-size grid, replicates."""

    scenario: Scenario
    estimators: tuple[EstimatorSpec, ...]
    m_grid: tuple[int, ...]
    reps: int
    seed: int
    workers: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise ValidationError("need at least one replicate")
        if self.seed is None:
            raise ValidationError("a master seed is mandatory")
        if isinstance(self.scenario.design, Srswor):
            M = self.scenario.graph.num_units
            for m in self.m_grid:
                if not 1 <= m <= M:
                    raise ValidationError(f"grid size m={m} outside 1..{M}")


@dataclass(frozen=True)
class EfficiencyRow:
    scenario: str
    design: str
    m: int
    estimator: str
    params: str
    reps: int
    seed: int
    mean: float | None
    mse: float | None
    rel_eff: float | None
    flags: str = ""


def _with_ht_first(specs: Sequence[EstimatorSpec]) -> tuple[EstimatorSpec, ...]:
    if any(s.kind == "ht" for s in specs):
        return tuple(specs)
    return (EstimatorSpec("ht"),) + tuple(specs)


def _compile_srswor_plan(graph: BipartiteIncidenceGraph, m: int,
                         specs: Sequence[EstimatorSpec]) -> dict:
    """Index-level tables so the replicate loop touches no id strings."""
    M = graph.num_units
    design = Srswor(graph.units, m)
    alpha = [np.asarray(a, dtype=np.int64) for a in graph.successor_indexes]
    beta = graph.ancestor_indexes
    y = np.asarray([float(graph.y_value(k)) for k in graph.motifs])
    pi_unit = m / M

    # Motif inclusion probability depends only on the ancestor count.
    pi_by_count: dict[int, float] = {}
    for b in {len(anc) for anc in beta}:
        if M - b < m:
            pi_by_count[b] = 1.0
        else:
            pi_by_count[b] = float(
                1 - Fraction(math.comb(M - b, m), math.comb(M, m)))

    # Prioritization probability depends only on how many higher-priority
    # ancestors a motif has in front of the unit.
    max_b = max(len(anc) for anc in beta)
    p_by_pos = []
    for pos in range(max_b):
        if M - 1 - pos < m - 1:
            p_by_pos.append(0.0)
        else:
            p_by_pos.append(float(Fraction(math.comb(M - 1 - pos, m - 1),
                                           math.comb(M - 1, m - 1))))

    plans = []
    for spec in specs:
        label = spec.label
        if spec.kind in ("ht", "ht_share"):
            vals = np.asarray([y[k] / pi_by_count[len(beta[k])]
                               for k in range(graph.num_motifs)])
            plans.append((label, "ht", vals, ""))
        elif spec.kind == "hh":
            table = constant_weights(graph, spec.scheme or Multiplicity(), design)
            z = np.zeros(M)
            for (u, k), w in table.items():
                z[graph.unit_position(u)] += float(w) * float(graph.y_value(k))
            plans.append((label, "hh", z / pi_unit, ""))
        elif spec.kind == "priority":
            ordering = (resolve_ordering(graph, spec.ordering, spec.ordering_seed)
                        if isinstance(spec.ordering, str) else tuple(spec.ordering))
            rank = {graph.unit_position(u): r for r, u in enumerate(ordering)}
            anc_rank = []
            term = []
            blocked = False
            for k in range(graph.num_motifs):
                anc = sorted(beta[k], key=lambda u: rank[u])
                anc_rank.append(anc)
                b = len(anc)
                row = []
                for pos in range(b):
                    p = p_by_pos[pos]
                    if p == 0.0:
                        blocked = True
                        row.append(0.0)  # never reached by a realized sample
                    else:
                        row.append(y[k] / (b * p * pi_unit))
                term.append(row)
            flags = "biased_priority" if blocked else ""
            plans.append((label, "priority", (anc_rank, term), flags))
        else:
            raise ValidationError(f"unknown estimator kind {spec.kind!r}")
    return {"M": M, "m": m, "alpha": alpha, "est": plans}


def _srswor_chunk(plan: dict, seed: int, r0: int, r1: int) -> dict[str, np.ndarray]:
    M, m, alpha = plan["M"], plan["m"], plan["alpha"]
    out = {label: np.empty(r1 - r0) for label, _, _, _ in plan["est"]}
    for r in range(r0, r1):
        rng = np.random.default_rng([seed, m, r])
        s_idx = rng.choice(M, size=m, replace=False)
        omega = np.unique(np.concatenate([alpha[i] for i in s_idx]))
        s_set = set(int(i) for i in s_idx)
        omega_list = omega.tolist()
        for label, kind, payload, _ in plan["est"]:
            if kind == "ht":
                est = float(payload[omega].sum())
            elif kind == "hh":
                est = float(payload[s_idx].sum())
            else:
                anc_rank, term = payload
                est = 0.0
                for k in omega_list:
                    for pos, u in enumerate(anc_rank[k]):
                        if u in s_set:
                            est += term[k][pos]
                            break
            out[label][r - r0] = est
    return out


def _simulate_srswor_block(graph, m, specs, reps, seed, workers):
    plan = _compile_srswor_plan(graph, m, specs)
    results = {label: np.empty(reps) for label, _, _, _ in plan["est"]}
    if workers <= 1 or reps < 2 * workers:
        chunks = [(0, reps)]
        outs = [_srswor_chunk(plan, seed, 0, reps)]
    else:
        step = -(-reps // workers)
        chunks = [(r0, min(r0 + step, reps)) for r0 in range(0, reps, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_srswor_chunk, [plan] * len(chunks),
                                 [seed] * len(chunks),
                                 [r0 for r0, _ in chunks],
                                 [r1 for _, r1 in chunks]))
    for (r0, r1), chunk_out in zip(chunks, outs):
        for label, arr in chunk_out.items():
            results[label][r0:r1] = arr
    flags = {label: fl for label, _, _, fl in plan["est"]}
    return results, flags


def _simulate_iid_block(graph, design: IidDraws, specs, reps, seed):
    flags: dict[str, str] = {}
    fns = {}
    for spec in specs:
        if spec.kind == "priority":
            flags[spec.label] = "na"
            continue
        fns[spec.label] = make_point_estimator(spec, graph, design)
        flags[spec.label] = ""
    results = {label: np.empty(reps) for label in fns}
    for r in range(reps):
        rng = np.random.default_rng([seed, design.n, r])
        sample = observe_draws(graph, design.draw_sample(rng))
        for label, fn in fns.items():
            results[label][r] = float(fn(sample))
    return results, flags


def run_simulation(config: SimulationConfig) -> list[EfficiencyRow]:
    """Efficiency table rows, one per (sample size, estimator)."""
    graph = config.scenario.graph
    theta = float(graph.y_total)
    specs = _with_ht_first(config.estimators)
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise ValidationError(f"duplicate estimators in {labels!r}")
    design = config.scenario.design
    rows: list[EfficiencyRow] = []

    if isinstance(design, Srswor):
        design_name = "srswor"
        blocks = [(m, None) for m in config.m_grid]
    else:
        design_name = "iid_draws"
        blocks = [(design.n, design)]

    for m, iid_design in blocks:
        if iid_design is None:
            results, flags = _simulate_srswor_block(
                graph, m, specs, config.reps, config.seed, config.workers)
        else:
            results, flags = _simulate_iid_block(
                graph, iid_design, specs, config.reps, config.seed)
        mse = {}
        mean = {}
        for label, arr in results.items():
            mean[label] = math.fsum(arr) / config.reps
            mse[label] = math.fsum((arr - theta) ** 2) / config.reps
        ht_label = next(s.label for s in specs if s.kind == "ht")
        mse_ht = mse[ht_label]
        for spec in specs:
            label = spec.label
            if label not in results:
                rows.append(EfficiencyRow(
                    config.scenario.name, design_name, m, label, spec.params,
                    config.reps, config.seed, None, None, None,
                    flags.get(label, "na")))
                continue
            if label == ht_label:
                rel = 1.0
            elif mse_ht == 0.0:
                # Census-like block: HT is exact, the ratio has no finite value.
                rel = 1.0 if mse[label] == 0.0 else None
            else:
                rel = mse[label] / mse_ht
            rows.append(EfficiencyRow(
                config.scenario.name, design_name, m, label, spec.params,
                config.reps, config.seed, mean[label], mse[label], rel,
                flags.get(label, "")))
    return rows


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def rows_to_csv(rows: Sequence[EfficiencyRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([format_value(v) for v in (
            row.scenario, row.design, row.m, row.estimator, row.params,
            row.reps, row.seed, row.mean, row.mse, row.rel_eff, row.flags)])
    return buf.getvalue()
