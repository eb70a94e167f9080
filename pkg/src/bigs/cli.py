"""Command-line front end: estimate, oracle, simulate, rb, scenario."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from .design import DEFAULT_ENUM_CAP, design_from_json
from .errors import EnumerationCapError, UnreachableMotifSetError, ValidationError
from .estimators import (evaluate, make_point_estimator, parse_estimator,
                         parse_estimator_list, scheme_for, iwe_true_variance)
from .exact import exact_moments, priority_support_check, rao_blackwellize
from .graph import graph_from_json
from .scenarios import (Scenario, get_scenario, sample_from_spec,
                        scenario_names, scenario_to_json)
from .simulate import SimulationConfig, run_simulation, rows_to_csv

ESTIMATE_COLUMNS = ("scenario", "estimator", "gamma", "seed", "point",
                    "var_est", "true_var", "flags")
DEFAULT_ORACLE_ESTIMATORS = ("ht,ht_share,hh:multiplicity,hh:pida:0,"
                             "hh:pida:0.5,hh:pida:1,hh:pida:2,priority")


def _load_json(text: str):
    if os.path.isfile(text):
        with open(text, "r", encoding="utf-8") as fh:
            text = fh.read()
    def bad_const(name):
        raise ValidationError(f"non-finite number {name!r} in JSON input")
    try:
        return json.loads(text, parse_constant=bad_const)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"cannot parse JSON input: {exc}") from exc


def _resolve_inputs(args) -> Scenario:
    """Common --scenario / --graph / --design handling."""
    if getattr(args, "scenario", None):
        sc = get_scenario(args.scenario)
        if getattr(args, "design", None):
            design = design_from_json(_load_json(args.design), sc.graph.units)
            sc = Scenario(sc.name, sc.graph, design, sc.observed, sc.expected,
                          sc.description)
        return sc
    if not getattr(args, "graph", None):
        raise ValidationError("need either --scenario or --graph")
    graph = graph_from_json(_load_json(args.graph))
    if not getattr(args, "design", None):
        raise ValidationError("--graph needs a --design")
    design = design_from_json(_load_json(args.design), graph.units)
    name = os.path.splitext(os.path.basename(args.graph))[0]
    return Scenario(name=name, graph=graph, design=design)


def _write_text(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _num(value):
    if value is None:
        return ""
    return format(float(value), ".10g")


def _exact_str(value):
    return str(value) if isinstance(value, (int, Fraction)) else None


def cmd_estimate(args) -> int:
    sc = _resolve_inputs(args)
    if args.sample:
        spec = _load_json(args.sample)
        if isinstance(spec, list):
            spec = {"s": spec}
    elif sc.observed:
        spec = sc.observed
    else:
        raise ValidationError(f"no sample given and scenario {sc.name!r} has none recorded")
    sample = sample_from_spec(sc.graph, spec)
    specs = parse_estimator_list(args.estimators)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ESTIMATE_COLUMNS)
    for est in specs:
        report = evaluate(est, sample, sc.design, sc.graph,
                          with_true_variance=args.with_true_variance)
        writer.writerow([sc.name, report.estimator, est.gamma, "",
                         _num(report.point), _num(report.variance_estimate),
                         _num(report.true_variance), ";".join(report.flags)])
    _write_text(buf.getvalue(), args.out)
    return 0


def cmd_oracle(args) -> int:
    sc = _resolve_inputs(args)
    theta = sc.graph.y_total
    entries = []
    for est in parse_estimator_list(args.estimators):
        fn = make_point_estimator(est, sc.graph, sc.design)
        moments = exact_moments(sc.graph, sc.design, fn, args.cap)
        bias = moments.mean - theta
        entry = {
            "estimator": est.label,
            "mean": float(moments.mean),
            "theta": float(theta),
            "bias": float(bias),
            "unbiased": bool(bias == 0),
            "variance": float(moments.variance),
        }
        for key, value in (("mean_exact", moments.mean), ("bias_exact", bias),
                           ("variance_exact", moments.variance)):
            exact = _exact_str(value)
            if exact is not None:
                entry[key] = exact
        try:
            formula = iwe_true_variance(sc.graph, sc.design,
                                        scheme_for(est, sc.graph, sc.design))
            entry["formula_variance"] = float(formula)
            entry["max_abs_diff"] = abs(float(moments.variance) - float(formula))
        except ValidationError as exc:
            entry["formula_variance"] = None
            entry["formula_error"] = str(exc)
        if est.kind == "priority":
            from .weights import resolve_ordering
            ordering = (resolve_ordering(sc.graph, est.ordering, est.ordering_seed)
                        if isinstance(est.ordering, str) else tuple(est.ordering))
            entry["hazards"] = [list(h) for h in
                                priority_support_check(sc.graph, sc.design, ordering)]
        entries.append(entry)
    text = json.dumps({"scenario": sc.name, "estimators": entries}, indent=2) + "\n"
    _write_text(text, args.out)
    return 0


def cmd_simulate(args) -> int:
    sc = _resolve_inputs(args)
    try:
        m_grid = tuple(int(tok) for tok in args.m_grid.split(",") if tok.strip())
    except ValueError as exc:
        raise ValidationError(f"bad --m-grid: {exc}") from exc
    config = SimulationConfig(
        scenario=sc,
        estimators=parse_estimator_list(args.estimators),
        m_grid=m_grid,
        reps=args.reps,
        seed=args.seed,
        workers=args.workers,
    )
    rows = run_simulation(config)
    _write_text(rows_to_csv(rows), args.out)
    if args.fig_dir:
        from .figures import save_degree_histograms, save_efficiency_curves
        os.makedirs(args.fig_dir, exist_ok=True)
        slug = "".join(c if c.isalnum() else "-" for c in sc.name)
        save_degree_histograms(sc.graph, os.path.join(args.fig_dir, f"{slug}_degrees.png"))
        save_efficiency_curves(rows, os.path.join(args.fig_dir, f"{slug}_releff.png"))
    return 0


def cmd_rb(args) -> int:
    sc = _resolve_inputs(args)
    est = parse_estimator(args.estimator)
    fn = make_point_estimator(est, sc.graph, sc.design)
    motifs = [tok.strip() for tok in args.motifs.split(",") if tok.strip()]
    value = rao_blackwellize(sc.graph, sc.design, fn, motifs, args.cap)
    out = {"scenario": sc.name, "estimator": est.label,
           "motifs": sorted(motifs), "value": float(value)}
    exact = _exact_str(value)
    if exact is not None:
        out["value_exact"] = exact
    _write_text(json.dumps(out, indent=2) + "\n", args.out)
    return 0


def cmd_scenario(args) -> int:
    if args.scenario_action == "list":
        for name in scenario_names():
            sys.stdout.write(name + "\n")
        return 0
    sc = get_scenario(args.name)
    _write_text(json.dumps(scenario_to_json(sc), indent=2) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bigs",
        description="Design-based estimation for bipartite incidence graph sampling.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_inputs(p):
        p.add_argument("--scenario", help="built-in scenario name, or synthetic:M,N,E,profile,seed")
        p.add_argument("--graph", help="graph JSON (file path or literal)")
        p.add_argument("--design", help="design JSON (file path or literal)")

    p = sub.add_parser("estimate", help="evaluate estimators on one sample")
    add_inputs(p)
    p.add_argument("--sample", help="sample JSON: {\"s\": [...]} or {\"draws\": [[...], ...]}")
    p.add_argument("--estimators", default="", help="comma-separated estimator list")
    p.add_argument("--with-true-variance", action="store_true",
                   help="also compute the closed-form true variance (needs the full graph)")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("oracle", help="exact moments and bias by full enumeration")
    add_inputs(p)
    p.add_argument("--estimators", default=DEFAULT_ORACLE_ESTIMATORS)
    p.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP,
                   help="largest sample-space size to enumerate")
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("simulate", help="Monte Carlo relative-efficiency table")
    add_inputs(p)
    p.add_argument("--estimators", default="ht")
    p.add_argument("--m-grid", default="2", help="comma-separated initial sample sizes")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--fig-dir", help="also render report figures into this directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("rb", help="Rao-Blackwellize an estimator given an observed motif set")
    add_inputs(p)
    p.add_argument("--estimator", required=True)
    p.add_argument("--motifs", required=True, help="comma-separated observed motif ids")
    p.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP)
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.set_defaults(func=cmd_rb)

    p = sub.add_parser("scenario", help="list or export built-in scenarios")
    psub = p.add_subparsers(dest="scenario_action", required=True)
    pl = psub.add_parser("list")
    pl.set_defaults(func=cmd_scenario)
    pe = psub.add_parser("export")
    pe.add_argument("name")
    pe.add_argument("--out")
    pe.set_defaults(func=cmd_scenario)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except UnreachableMotifSetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
