"""Benchmark sweeps and the analytic ratio curve."""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from typing import Iterable, List, Optional, Sequence

from .algorithms import ALGORITHMS, MODES, run_algorithm
from .engine import OracleSizeError, brute_force_optimum
from .generator import GenParams, generate
from .grouping import compute_gamma_k
from .lp_core import LpTooLargeError
from .model import without_releases

RATIO_FLOOR = 1 - 1e-6
EPS = 1e-6


@dataclass
class BenchRow:
    instance_id: str
    seed: int
    algorithm: str
    mode: str
    objective: str
    n: int
    m: int
    N: int
    flows: int
    lp_objective: Optional[float]
    alg_objective: Optional[float]
    bound: float
    ratio: Optional[float]
    oracle: Optional[float]
    status: str          # OK | FAILED | SKIPPED
    reason: str
    runtime_ms: float    # wall clock; the one non-deterministic column


BENCH_HEADER = [f.name for f in fields(BenchRow)]
TIMING_COLUMNS = ("runtime_ms",)


def bound_constant(algorithm: str, m: int) -> float:
    gamma, K = compute_gamma_k(m)
    return {
        "indiv-makespan": 8 * m * gamma * K,
        "div-makespan": 8 * K + 4 * gamma,
        "indiv-twct": 64 * m * gamma * K,
        "div-twct": 64 * K + 32 * gamma,
    }[algorithm]


def trial_seed(base_seed: int, point: int, trial: int) -> int:
    return base_seed + 1000 * point + trial


def _evaluate(args) -> List[BenchRow]:
    params, point, trial, algorithms, oracle = args
    inst = generate(params)
    rows = []
    for name in algorithms:
        mode, objective = MODES[name]
        row = BenchRow(f"p{point}-t{trial}", params.seed, name, mode, objective, inst.n, inst.m,
                       inst.num_ports, inst.num_flows, None, None, bound_constant(name, inst.m),
                       None, None, "OK", "", 0.0)
        start = time.perf_counter()
        try:
            run = run_algorithm(name, inst)
        except LpTooLargeError as exc:
            row.status, row.reason = "SKIPPED", str(exc)
            rows.append(row)
            continue
        row.runtime_ms = round((time.perf_counter() - start) * 1000, 3)
        row.lp_objective, row.alg_objective, row.ratio = run.lp_objective, run.objective, run.ratio
        problems = []
        if run.ratio < RATIO_FLOOR:
            problems.append(f"ratio {run.ratio:.6g} below 1")
        if not run.within_bound:
            problems.append(f"ratio {run.ratio:.6g} above bound {row.bound:.6g}")
        if oracle:
            target = without_releases(inst) if objective == "makespan" else inst
            try:
                row.oracle = brute_force_optimum(target, mode, objective)
            except OracleSizeError as exc:
                row.reason = f"oracle skipped: {exc}"
            else:
                if not (run.lp_objective <= row.oracle + EPS and row.oracle <= run.objective + EPS):
                    problems.append("LP <= oracle <= algorithm violated")
        if problems:
            row.status = "FAILED"
            row.reason = "; ".join(problems) + f" (repro: seed={params.seed})"
        rows.append(row)
    return rows


def bench(grid: Sequence[GenParams], trials: int, algorithms: Sequence[str] = tuple(ALGORITHMS),
          oracle: bool = False, base_seed: int = 0, threads: Optional[int] = None) -> List[BenchRow]:
    """One row per (grid point, trial, algorithm), in that order.

    ``threads`` defaults to ``$COFLOW_HPN_THREADS`` (1 if unset); rows are
    collected in deterministic order whatever the parallelism.
    """
    tasks = [(replace(p, seed=trial_seed(base_seed, gi, t)), gi, t, tuple(algorithms), oracle)
             for gi, p in enumerate(grid) for t in range(trials)]
    if threads is None:
        threads = int(os.environ.get("COFLOW_HPN_THREADS", "1"))
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_evaluate, tasks))
    else:
        chunks = [_evaluate(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Iterable[BenchRow], drop: Sequence[str] = ()) -> str:
    header = [h for h in BENCH_HEADER if h not in drop]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        d = asdict(row)
        w.writerow([_cell(d[h]) for h in header])
    return buf.getvalue()


# -- ratio curve -----------------------------------------------------------------

CURVE_HEADER = ["m", "gamma", "K", "4K+2gamma", "8K+4gamma", "8m*gamma*K", "64m*gamma*K", "64K+32gamma"]
CURVE_NOTE = ("# Analytic approximation ratios only. The single-coflow O(m) comparison curve "
              "is omitted: its constant is unpublished, so the m >= 25 crossover cannot be reproduced.")


def ratio_rows(m_min: int, m_max: int) -> List[list]:
    if not 4 <= m_min <= m_max:
        raise ValueError("need 4 <= m_min <= m_max")
    out = []
    for m in range(m_min, m_max + 1):
        g, K = compute_gamma_k(m)
        out.append([m, g, K, 4 * K + 2 * g, 8 * K + 4 * g, 8 * m * g * K, 64 * m * g * K, 64 * K + 32 * g])
    return out


def ratio_curve(m_min: int, m_max: int) -> str:
    buf = io.StringIO()
    buf.write(CURVE_NOTE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for row in ratio_rows(m_min, m_max):
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()
