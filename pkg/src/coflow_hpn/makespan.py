"""Makespan pipelines: LP (coflow or flow level) -> speed groups -> list schedule -> simulate.

The makespan relaxations carry no release times, so these pipelines run on
the instance with every release set to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .engine import ScheduleResult, simulate
from .grouping import SpeedGrouping, compute_gamma_k, preprocess_cores
from .lp_core import solve_lp
from .model import CoflowInstance, without_releases
from .relaxations import (FractionalAssignment, RelaxationLP, build_divisible_makespan_lp,
                          build_indivisible_makespan_lp, decode_solution)
from .schedulers import Assignment, coflow_list_schedule, flow_list_schedule, priority_order


@dataclass
class PipelineRun:
    algorithm: str
    instance: CoflowInstance          # the instance actually scheduled
    relaxation: RelaxationLP
    fractional: FractionalAssignment  # after re-massing onto kept cores
    grouping: SpeedGrouping
    assignment: Assignment
    schedule: ScheduleResult          # original time units
    lp_objective: float               # original time units
    objective: float                  # makespan or TWCT of ``schedule``
    bound: float
    plan: Optional[object] = None
    scale: float = 1.0

    @property
    def ratio(self) -> float:
        return self.objective / self.lp_objective

    @property
    def within_bound(self) -> bool:
        return self.objective <= self.bound * self.lp_objective * (1 + 1e-9) + 1e-9


def indivisible_makespan_bound(m: int) -> float:
    gamma, K = compute_gamma_k(m)
    return 8 * m * gamma * K


def divisible_makespan_bound(m: int) -> float:
    gamma, K = compute_gamma_k(m)
    return 8 * K + 4 * gamma


def run_indivisible_makespan(instance: CoflowInstance, lp_method: str = "highs") -> PipelineRun:
    inst = without_releases(instance)
    relax = build_indivisible_makespan_lp(inst)
    fa = decode_solution(relax, solve_lp(relax.lp, lp_method))
    grouping, massed = preprocess_cores(inst, fa)
    order = priority_order(fa.coflow_completion)
    assignment, _ = coflow_list_schedule(inst, grouping, massed.marginals(), order)
    result = simulate(inst, assignment)
    return PipelineRun("indiv-makespan", inst, relax, massed, grouping, assignment, result,
                       fa.makespan, result.makespan, indivisible_makespan_bound(inst.m))


def run_divisible_makespan(instance: CoflowInstance, lp_method: str = "highs") -> PipelineRun:
    inst = without_releases(instance)
    relax = build_divisible_makespan_lp(inst)
    fa = decode_solution(relax, solve_lp(relax.lp, lp_method))
    grouping, massed = preprocess_cores(inst, fa)
    order = priority_order(fa.flow_completion)
    assignment, _ = flow_list_schedule(inst, grouping, massed.marginals(), order)
    result = simulate(inst, assignment)
    return PipelineRun("div-makespan", inst, relax, massed, grouping, assignment, result,
                       fa.makespan, result.makespan, divisible_makespan_bound(inst.m))
