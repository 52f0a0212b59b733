"""``coflow-hpn`` command line: generate | run | bench | ratio-curve."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional, Sequence

from .algorithms import ALGORITHMS, MODES, run_algorithm
from .bench import bench, ratio_curve, rows_to_csv
from .engine import OracleSizeError, brute_force_optimum, compute_metrics
from .generator import GenParams, generate
from .grouping import compute_gamma_k
from .lp_core import LpError, LpTooLargeError, export_lp
from .model import InstanceError, load_instance, save_instance, scaled, without_releases
from .relaxations import (DIV_MAKESPAN, DIV_TWCT, INDIV_MAKESPAN, INDIV_TWCT, build,
                          compute_horizon)
from .twct import unit_scale

EXIT_OK, EXIT_INPUT, EXIT_BOUND = 0, 1, 2

_LP_KIND = {"indiv-makespan": INDIV_MAKESPAN, "div-makespan": DIV_MAKESPAN,
            "indiv-twct": INDIV_TWCT, "div-twct": DIV_TWCT}


def _span(text: str) -> tuple:
    lo, hi = text.split(":")
    return float(lo), float(hi)


def _sizes(text: str) -> tuple:
    kind, a, b = text.split(":")
    return kind, float(a), float(b)


def _int_span(text: str) -> tuple:
    lo, hi = text.split(":")
    return int(lo), int(hi)


def _emit(text: str, out: Optional[str]) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _gen_kwargs(args) -> dict:
    return dict(density=args.density, sizes=args.sizes, speeds=args.speeds,
                release_span=args.releases, weight_span=args.weights)


def cmd_generate(args) -> int:
    params = GenParams(N=args.N, m=args.m, n=args.n, seed=args.seed, **_gen_kwargs(args))
    _emit(save_instance(generate(params)), args.out)
    return EXIT_OK


def _export(instance, algorithm: str, path: str) -> None:
    kind = _LP_KIND[algorithm]
    if kind in (INDIV_MAKESPAN, DIV_MAKESPAN):
        relax = build(kind, without_releases(instance))
    else:
        inst = scaled(instance, unit_scale(instance))
        relax = build(kind, inst, compute_horizon(inst), allow_large=True)
    Path(path).write_text(export_lp(relax.lp))


def cmd_run(args) -> int:
    try:
        instance = load_instance(Path(args.instance).read_text())
    except (OSError, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.export_lp:
        _export(instance, args.algorithm, args.export_lp)
    try:
        run = run_algorithm(args.algorithm, instance)
    except LpTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LpError as exc:
        print(f"error: LP solve failed: {exc}", file=sys.stderr)
        return EXIT_INPUT
    metrics = compute_metrics(run.schedule, run.instance)
    gamma, K = compute_gamma_k(instance.m)
    mode, objective = MODES[args.algorithm]
    report = {
        "algorithm": args.algorithm,
        "mode": mode,
        "objective": objective,
        "instance": {"N": instance.num_ports, "m": instance.m, "n": instance.n,
                     "flows": instance.num_flows},
        "lp_objective": run.lp_objective,
        "alg_objective": run.objective,
        "makespan": run.schedule.makespan,
        "twct": run.schedule.twct,
        "ratio": run.ratio,
        "gamma": gamma,
        "K": K,
        "bound": run.bound,
        "bound_holds": run.within_bound,
        "time_scale": run.scale,
        "discarded_cores": sorted(run.grouping.discarded),
        "assignment": run.assignment.to_dict(),
        "coflows": metrics["coflows"],
    }
    if args.oracle:
        target = without_releases(instance) if objective == "makespan" else instance
        try:
            report["oracle"] = brute_force_optimum(target, mode, objective)
        except OracleSizeError as exc:
            report["oracle"] = None
            report["oracle_skipped"] = str(exc)
    if args.trace:
        Path(args.trace).write_text(run.schedule.trace_jsonl())
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = ["algorithm", "lp_objective", "alg_objective", "ratio", "bound", "bound_holds"]
        w.writerow(keys)
        w.writerow([repr(report[k]) if isinstance(report[k], float) else report[k] for k in keys])
        text = buf.getvalue()
    else:
        text = json.dumps(report, indent=2) + "\n"
    _emit(text, args.out)
    return EXIT_OK if run.within_bound else EXIT_BOUND


def cmd_bench(args) -> int:
    grid = [GenParams(N=N, m=m, n=n, **_gen_kwargs(args))
            for N in args.N for m in args.m for n in args.n]
    rows = bench(grid, args.trials, args.algorithms, oracle=args.oracle, base_seed=args.seed,
                 threads=args.threads)
    if args.format == "json":
        text = json.dumps([asdict(r) for r in rows], indent=2) + "\n"
    else:
        text = rows_to_csv(rows)
    _emit(text, args.out)
    return EXIT_BOUND if any(r.status == "FAILED" for r in rows) else EXIT_OK


def cmd_ratio_curve(args) -> int:
    try:
        text = ratio_curve(args.m_min, args.m_max)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(text, args.out)
    return EXIT_OK


def _add_gen_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--sizes", type=_sizes, default=("uniform", 1.0, 100.0),
                   help="uniform:a:b or pareto:alpha:xmin (default uniform:1:100)")
    p.add_argument("--speeds", type=_int_span, default=(1, 8), help="integer speed range lo:hi")
    p.add_argument("--releases", type=_span, default=(0.0, 50.0), help="release span lo:hi")
    p.add_argument("--weights", type=_span, default=(1.0, 10.0), help="weight span lo:hi")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coflow-hpn",
                                     description="Coflow scheduling on heterogeneous parallel network cores")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance as JSON")
    g.add_argument("--N", type=int, default=3)
    g.add_argument("--m", type=int, default=4)
    g.add_argument("--n", type=int, default=3)
    _add_gen_options(g)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="run one algorithm on an instance file")
    r.add_argument("instance")
    r.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="indiv-twct")
    r.add_argument("--out", default=None)
    r.add_argument("--format", choices=["json", "csv"], default="json")
    r.add_argument("--oracle", action="store_true", help="also brute-force the optimum (tiny instances)")
    r.add_argument("--export-lp", default=None, metavar="PATH")
    r.add_argument("--trace", default=None, metavar="PATH", help="write the event trace as JSON lines")
    r.add_argument("--seed", type=int, default=0, help="accepted for symmetry; runs are deterministic")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="sweep a grid of generated instances")
    b.add_argument("--N", type=int, nargs="*", default=[3])
    b.add_argument("--m", type=int, nargs="*", default=[4])
    b.add_argument("--n", type=int, nargs="*", default=[3])
    b.add_argument("--trials", type=int, default=20)
    b.add_argument("--algorithms", nargs="+", choices=sorted(ALGORITHMS), default=list(ALGORITHMS))
    b.add_argument("--oracle", action="store_true")
    b.add_argument("--threads", type=int, default=None,
                   help="worker processes (default $COFLOW_HPN_THREADS or 1)")
    b.add_argument("--format", choices=["csv", "json"], default="csv")
    b.add_argument("--out", default=None)
    _add_gen_options(b)
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("ratio-curve", help="analytic approximation ratios against m")
    c.add_argument("--m-min", type=int, default=4)
    c.add_argument("--m-max", type=int, default=1000)
    c.add_argument("--out", default=None)
    c.add_argument("--format", choices=["csv"], default="csv")
    c.set_defaults(func=cmd_ratio_curve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
