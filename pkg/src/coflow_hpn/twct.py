"""Total weighted completion time pipelines.

Items (coflows, or flows in divisible mode) are bucketed into geometric
intervals using the interval-indexed LP optimum: an item goes to the first
interval ``q`` by which half of its mass has completed and whose right end
``2^q`` covers its LP completion time.  Each bucket is list-scheduled on its
own with fresh load tables, and every core then runs its buckets in
interval order.

Instances whose smallest per-port transfer time is below one time unit are
solved on a copy with all sizes and releases multiplied by a power of two;
reported times are divided back.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Hashable, List

from .engine import ScheduleResult, simulate
from .grouping import compute_gamma_k, preprocess_cores
from .lp_core import solve_lp
from .makespan import PipelineRun
from .model import CoflowInstance, min_transfer_time, scaled
from .relaxations import (FractionalAssignment, Horizon, build_divisible_twct_lp,
                          build_indivisible_twct_lp, compute_horizon, decode_solution)
from .schedulers import (DIVISIBLE, INDIVISIBLE, Assignment, CoreLoadTable, coflow_list_schedule,
                         flow_list_schedule, priority_order)

HALF_TOL = 1e-9
COMPLETION_TOL = 1e-6


class IntervalError(RuntimeError):
    pass


@dataclass
class IntervalPlan:
    horizon: Horizon
    q: Dict[Hashable, int]
    classes: Dict[int, List[Hashable]]
    alpha: Dict[Hashable, float]
    x_tilde: Dict[Hashable, Dict[int, float]]


def assign_intervals(fractional: FractionalAssignment, horizon: Horizon) -> IntervalPlan:
    if not fractional.horizon_indexed:
        raise IntervalError("interval assignment needs an interval-indexed solution")
    L = horizon.L
    per_item: Dict[Hashable, Dict[int, Dict[int, float]]] = defaultdict(lambda: defaultdict(dict))
    for key, v in fractional.x.items():
        per_item[fractional.item_of(key)][key[-1]][key[0]] = \
            per_item[fractional.item_of(key)][key[-1]].get(key[0], 0.0) + v

    q: Dict[Hashable, int] = {}
    alpha: Dict[Hashable, float] = {}
    x_tilde: Dict[Hashable, Dict[int, float]] = {}
    classes: Dict[int, List[Hashable]] = {l: [] for l in range(1, L + 1)}
    for item in sorted(per_item, key=repr):
        by_l = per_item[item]
        c_bar = fractional.completion_of(item)
        cum = 0.0
        chosen = None
        for l in range(1, L + 1):
            cum += sum(by_l.get(l, {}).values())
            if cum >= 0.5 - HALF_TOL and c_bar <= 2.0 ** l + COMPLETION_TOL:
                chosen = l
                break
        if chosen is None:
            raise IntervalError(f"no interval fits {item!r} (C={c_bar}, mass={cum})")
        q[item] = chosen
        classes[chosen].append(item)
        alpha[item] = cum
        mass: Dict[int, float] = defaultdict(float)
        for l in range(1, chosen + 1):
            for k, v in by_l.get(l, {}).items():
                mass[k] += v / cum
        x_tilde[item] = dict(sorted(mass.items()))
    return IntervalPlan(horizon, q, classes, alpha, x_tilde)


def unit_scale(instance: CoflowInstance) -> float:
    """Smallest power of two lifting every positive port transfer time to >= 1."""
    shortest = min_transfer_time(instance)
    if shortest >= 1.0:
        return 1.0
    scale = 2.0 ** math.ceil(-math.log2(shortest))
    # a power of two may still land a hair short after rounding
    while min_transfer_time(scaled(instance, scale)) < 1.0:
        scale *= 2
    return scale


def indivisible_twct_bound(m: int) -> float:
    gamma, K = compute_gamma_k(m)
    return 64 * m * gamma * K


def divisible_twct_bound(m: int) -> float:
    gamma, K = compute_gamma_k(m)
    return 64 * K + 32 * gamma


def _pipeline(instance: CoflowInstance, divisible: bool, lp_method: str) -> PipelineRun:
    scale = unit_scale(instance)
    inst = scaled(instance, scale) if scale != 1.0 else instance
    horizon = compute_horizon(inst)
    build = build_divisible_twct_lp if divisible else build_indivisible_twct_lp
    relax = build(inst, horizon)
    fa = decode_solution(relax, solve_lp(relax.lp, lp_method))
    grouping, massed = preprocess_cores(inst, fa)
    plan = assign_intervals(massed, horizon)

    completion = massed.flow_completion if divisible else massed.coflow_completion
    merged = Assignment(DIVISIBLE if divisible else INDIVISIBLE,
                        {c.id: [] for c in inst.cores}, {}, {})
    rank = 0
    for l in range(1, horizon.L + 1):
        members = plan.classes[l]
        if not members:
            continue
        order = priority_order({it: completion[it] for it in members})
        marg = {it: plan.x_tilde[it] for it in members}
        place = flow_list_schedule if divisible else coflow_list_schedule
        part, _ = place(inst, grouping, marg, order, CoreLoadTable())
        for h, items in part.per_core.items():
            merged.per_core[h].extend(items)
        for it in order:
            merged.priority[it] = rank
            merged.interval[it] = l
            rank += 1

    raw = simulate(inst, merged)
    result = raw.rescaled(scale) if scale != 1.0 else raw
    name = "div-twct" if divisible else "indiv-twct"
    bound = (divisible_twct_bound if divisible else indivisible_twct_bound)(inst.m)
    return PipelineRun(name, instance, relax, massed, grouping, merged, result,
                       fa.objective / scale, result.twct, bound, plan, scale)


def solve_indivisible_twct(instance: CoflowInstance, lp_method: str = "highs") -> PipelineRun:
    return _pipeline(instance, divisible=False, lp_method=lp_method)


def solve_divisible_twct(instance: CoflowInstance, lp_method: str = "highs") -> PipelineRun:
    return _pipeline(instance, divisible=True, lp_method=lp_method)


def run_indivisible_twct(instance: CoflowInstance) -> ScheduleResult:
    return solve_indivisible_twct(instance).schedule


def run_divisible_twct(instance: CoflowInstance) -> ScheduleResult:
    return solve_divisible_twct(instance).schedule
