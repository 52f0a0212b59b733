"""Core preprocessing: drop very slow cores and bucket the rest by speed."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, List, Mapping, Sequence, Tuple

from .model import CoflowInstance
from .relaxations import FractionalAssignment

MASS_TOL = 1e-9


def compute_gamma_k(m: int) -> Tuple[float, int]:
    """``gamma = max(2, log m / log log m)`` and ``K = max(1, ceil(log_gamma m))``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    gamma = 2.0
    if m > 2:
        gamma = max(2.0, math.log2(m) / math.log2(math.log2(m)))
    K = math.ceil(math.log(m) / math.log(gamma) - 1e-12) if m > 1 else 0
    return gamma, max(1, K)


@dataclass(frozen=True)
class SpeedGrouping:
    gamma: float
    K: int
    groups: Tuple[FrozenSet[int], ...]        # groups[k - 1] is M_k
    group_speed: Tuple[float, ...]            # s(M_k) in original speed units
    kept_core_scale: float                    # m / s_max
    discarded: FrozenSet[int]
    fastest: int
    normalized_speed: Mapping[int, float]     # kept cores only

    def group_of(self, core: int) -> int:
        for k, members in enumerate(self.groups, start=1):
            if core in members:
                return k
        raise KeyError(core)

    @property
    def kept(self) -> FrozenSet[int]:
        return frozenset().union(*self.groups)

    def bracket(self, k: int) -> Tuple[float, float]:
        return self.gamma ** (k - 1), self.gamma ** k


def _group_index(v: float, gamma: float, K: int) -> int:
    k = 1
    while k < K and v >= gamma ** k:
        k += 1
    return k


def group_cores(speeds: Mapping[int, float]) -> SpeedGrouping:
    """Discard cores at most ``1/m`` of the fastest, normalise, and bucket."""
    m = len(speeds)
    gamma, K = compute_gamma_k(m)
    s_max = max(speeds.values())
    fastest = min(k for k, s in speeds.items() if s == s_max)
    threshold = s_max / m
    discarded = frozenset(k for k, s in speeds.items() if s <= threshold and k != fastest)
    scale = m / s_max
    normalized = {k: s * scale for k, s in speeds.items() if k not in discarded}
    members: List[set] = [set() for _ in range(K)]
    for k, v in normalized.items():
        members[_group_index(v, gamma, K) - 1].add(k)
    groups = tuple(frozenset(g) for g in members)
    group_speed = tuple(sum(speeds[u] for u in g) for g in groups)
    return SpeedGrouping(gamma, K, groups, group_speed, scale, discarded, fastest, normalized)


def remass(fractional: FractionalAssignment, grouping: SpeedGrouping) -> FractionalAssignment:
    """Move every discarded core's x-mass onto the fastest core, key-wise."""
    x: Dict[tuple, float] = {}
    for key, v in fractional.x.items():
        if key[0] in grouping.discarded:
            key = (grouping.fastest,) + tuple(key[1:])
        x[key] = x.get(key, 0.0) + v
    return replace(fractional, x=x)


def preprocess_cores(instance: CoflowInstance, fractional: FractionalAssignment
                     ) -> Tuple[SpeedGrouping, FractionalAssignment]:
    grouping = group_cores(instance.speeds())
    return grouping, remass(fractional, grouping)


def group_marginals(core_mass: Mapping[int, float], grouping: SpeedGrouping) -> List[float]:
    """Total fraction on each group ``M_1..M_K``; mass on unknown cores is an error."""
    out = [0.0] * grouping.K
    for core, v in core_mass.items():
        out[grouping.group_of(core) - 1] += v
    return out


def select_group(marginals: Sequence[float], grouping: SpeedGrouping) -> Tuple[int, int]:
    """``(l, r)``: largest ``l`` whose suffix mass reaches 1/2, then the group in
    ``[l, K]`` with the largest total speed (ties to the smaller index)."""
    K = grouping.K
    suffix = 0.0
    ell = 1
    for k in range(K, 0, -1):
        suffix += marginals[k - 1]
        if suffix >= 0.5 - MASS_TOL:
            ell = k
            break
    r = max(range(ell, K + 1), key=lambda k: (grouping.group_speed[k - 1], -k))
    return ell, r
