"""Seeded random instances."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .model import Coflow, CoflowInstance, Core


@dataclass(frozen=True)
class GenParams:
    N: int = 3
    m: int = 4
    n: int = 3
    density: float = 0.5
    # ("uniform", a, b) or ("pareto", alpha, x_min)
    sizes: Tuple = ("uniform", 1.0, 100.0)
    speeds: Tuple[int, int] = (1, 8)            # integer speeds drawn from {lo..hi}
    release_span: Tuple[float, float] = (0.0, 50.0)
    weight_span: Tuple[float, float] = (1.0, 10.0)
    seed: int = 0

    def __post_init__(self):
        if min(self.N, self.m, self.n) < 1:
            raise ValueError("N, m and n must be positive")
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        lo, hi = self.speeds
        if not 0 < lo <= hi:
            raise ValueError("speed range must be positive")
        for lo, hi in (self.release_span, self.weight_span):
            if hi < lo:
                raise ValueError("spans must be ordered (lo, hi)")
        if self.weight_span[0] <= 0 or self.release_span[0] < 0:
            raise ValueError("weights must be positive and releases non-negative")
        kind = self.sizes[0]
        if kind == "uniform":
            if not 0 < self.sizes[1] <= self.sizes[2]:
                raise ValueError("uniform sizes need 0 < a <= b")
        elif kind == "pareto":
            if not (self.sizes[1] > 0 and self.sizes[2] > 0):
                raise ValueError("pareto sizes need alpha > 0 and x_min > 0")
        else:
            raise ValueError(f"unknown size distribution {kind!r}")


def _size(rng: np.random.Generator, dist) -> float:
    if dist[0] == "uniform":
        return float(rng.uniform(dist[1], dist[2]))
    alpha, x_min = dist[1], dist[2]
    return float(x_min * (1.0 + rng.pareto(alpha)))


def generate(params: GenParams) -> CoflowInstance:
    rng = np.random.default_rng(params.seed)
    lo, hi = params.speeds
    cores = tuple(Core(k, float(rng.integers(lo, hi + 1))) for k in range(1, params.m + 1))
    coflows = []
    for f in range(1, params.n + 1):
        weight = float(rng.uniform(*params.weight_span))
        release = float(rng.uniform(*params.release_span))
        demand = {}
        while not demand:  # resample empty coflows
            for i in range(1, params.N + 1):
                for j in range(1, params.N + 1):
                    if rng.random() < params.density:
                        demand[(i, j)] = _size(rng, params.sizes)
        coflows.append(Coflow(f, weight, release, demand))
    return CoflowInstance(params.N, cores, tuple(coflows))
