"""LP-rounding schedulers for coflows on heterogeneous parallel network cores."""

from .algorithms import ALGORITHMS, run_algorithm
from .engine import ScheduleResult, brute_force_optimum, simulate
from .generator import GenParams, generate
from .grouping import SpeedGrouping, compute_gamma_k, group_cores
from .makespan import PipelineRun, run_divisible_makespan, run_indivisible_makespan
from .model import Coflow, CoflowInstance, Core, InstanceError, load_instance, save_instance
from .twct import run_divisible_twct, run_indivisible_twct

__all__ = [
    "ALGORITHMS", "Coflow", "CoflowInstance", "Core", "GenParams", "InstanceError", "PipelineRun",
    "ScheduleResult", "SpeedGrouping", "brute_force_optimum", "compute_gamma_k", "generate",
    "group_cores", "load_instance", "run_algorithm", "run_divisible_makespan",
    "run_divisible_twct", "run_indivisible_makespan", "run_indivisible_twct", "save_instance",
    "simulate",
]

__version__ = "0.1.0"
