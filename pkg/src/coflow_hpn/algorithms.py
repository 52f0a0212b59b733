"""Name -> pipeline registry shared by the CLI and the benchmark harness."""

from __future__ import annotations

from typing import Callable, Dict

from .makespan import PipelineRun, run_divisible_makespan, run_indivisible_makespan
from .model import CoflowInstance
from .twct import solve_divisible_twct, solve_indivisible_twct

ALGORITHMS: Dict[str, Callable[..., PipelineRun]] = {
    "indiv-makespan": run_indivisible_makespan,
    "div-makespan": run_divisible_makespan,
    "indiv-twct": solve_indivisible_twct,
    "div-twct": solve_divisible_twct,
}

# which engine mode / objective each algorithm produces
MODES = {
    "indiv-makespan": ("indivisible", "makespan"),
    "div-makespan": ("divisible", "makespan"),
    "indiv-twct": ("indivisible", "twct"),
    "div-twct": ("divisible", "twct"),
}


def run_algorithm(name: str, instance: CoflowInstance, lp_method: str = "highs") -> PipelineRun:
    try:
        fn = ALGORITHMS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}") from None
    return fn(instance, lp_method=lp_method)
