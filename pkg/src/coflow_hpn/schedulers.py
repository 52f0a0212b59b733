"""Speed-group list scheduling of coflows (indivisible) or flows (divisible).

Both routines walk items in priority order, pick the speed group ``r`` from
the item's fractional marginals, and drop the item on the least-loaded core
of that group.  Loads are kept in data units; only the placement score
divides by core speed.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

from .grouping import SpeedGrouping, group_marginals, select_group
from .model import CoflowInstance, port_loads

INDIVISIBLE = "indivisible"
DIVISIBLE = "divisible"


@dataclass
class CoreLoadTable:
    load_I: Dict[Tuple[int, int], float] = field(default_factory=lambda: defaultdict(float))
    load_O: Dict[Tuple[int, int], float] = field(default_factory=lambda: defaultdict(float))

    def input(self, i: int, h: int) -> float:
        return self.load_I.get((i, h), 0.0)

    def output(self, j: int, h: int) -> float:
        return self.load_O.get((j, h), 0.0)

    def ports_in(self, h: int) -> Dict[int, float]:
        return {i: v for (i, c), v in self.load_I.items() if c == h}

    def ports_out(self, h: int) -> Dict[int, float]:
        return {j: v for (j, c), v in self.load_O.items() if c == h}


@dataclass
class Assignment:
    """Items per core plus their dispatch priority.

    Items are coflow ids (indivisible) or flow keys ``(i, j, f)``
    (divisible).  ``interval`` is filled in by the TWCT pipelines; when set,
    each core runs its items interval by interval.
    """

    mode: str
    per_core: Dict[int, List[Hashable]] = field(default_factory=dict)
    priority: Dict[Hashable, int] = field(default_factory=dict)
    interval: Optional[Dict[Hashable, int]] = None

    def core_of(self) -> Dict[Hashable, int]:
        return {item: h for h, items in self.per_core.items() for item in items}

    def items(self) -> List[Hashable]:
        return sorted(self.priority, key=self.priority.__getitem__)

    def to_dict(self) -> dict:
        def enc(item):
            return list(item) if isinstance(item, tuple) else item

        return {
            "mode": self.mode,
            "per_core": {str(h): [enc(it) for it in items] for h, items in sorted(self.per_core.items())},
            "interval": None if self.interval is None else
            [[enc(it), l] for it, l in sorted(self.interval.items(), key=lambda kv: self.priority[kv[0]])],
        }


def _best_core(candidates, score) -> int:
    return min(sorted(candidates), key=lambda h: (score(h), h))


def coflow_list_schedule(instance: CoflowInstance, grouping: SpeedGrouping,
                         marginals: Mapping[int, Mapping[int, float]],
                         order: Sequence[int],
                         loads: Optional[CoreLoadTable] = None) -> Tuple[Assignment, CoreLoadTable]:
    """Place coflows in ``order``; ``marginals[f][k]`` is the fraction of ``f`` on core ``k``.

    The placement score of core ``h`` is the worst post-placement port-pair
    load ``load_I(i,h) + load_O(j,h) + L_if + L_jf`` over pairs that ``f``
    touches, divided by ``s_h``.
    """
    loads = loads if loads is not None else CoreLoadTable()
    pl = port_loads(instance)
    speed = instance.speeds()
    asg = Assignment(INDIVISIBLE, {h: [] for h in sorted(speed)}, {})
    for rank, f in enumerate(order):
        _, r = select_group(group_marginals(marginals[f], grouping), grouping)
        L_in, L_out = pl.inputs_of(f), pl.outputs_of(f)

        def score(h: int) -> float:
            a = {i: v for i, v in loads.ports_in(h).items()}
            b = {j: v for j, v in loads.ports_out(h).items()}
            for i, v in L_in.items():
                a[i] = a.get(i, 0.0) + v
            for j, v in L_out.items():
                b[j] = b.get(j, 0.0) + v
            # max over (i, j) with L_if + L_jf > 0: i used by f, or j used by f
            best_a, best_b = max(a.values(), default=0.0), max(b.values(), default=0.0)
            worst = max(max(a[i] for i in L_in) + best_b, best_a + max(b[j] for j in L_out))
            return worst / speed[h]

        h_star = _best_core(grouping.groups[r - 1], score)
        asg.per_core[h_star].append(f)
        asg.priority[f] = rank
        for i, v in L_in.items():
            loads.load_I[(i, h_star)] += v
        for j, v in L_out.items():
            loads.load_O[(j, h_star)] += v
    return asg, loads


def flow_list_schedule(instance: CoflowInstance, grouping: SpeedGrouping,
                       marginals: Mapping[Tuple[int, int, int], Mapping[int, float]],
                       order: Sequence[Tuple[int, int, int]],
                       loads: Optional[CoreLoadTable] = None) -> Tuple[Assignment, CoreLoadTable]:
    loads = loads if loads is not None else CoreLoadTable()
    speed = instance.speeds()
    asg = Assignment(DIVISIBLE, {h: [] for h in sorted(speed)}, {})
    for rank, key in enumerate(order):
        i, j, f = key
        d = instance.coflow(f).demand[(i, j)]
        _, r = select_group(group_marginals(marginals[key], grouping), grouping)
        h_star = _best_core(grouping.groups[r - 1],
                            lambda h: (loads.input(i, h) + loads.output(j, h)) / speed[h])
        asg.per_core[h_star].append(key)
        asg.priority[key] = rank
        loads.load_I[(i, h_star)] += d
        loads.load_O[(j, h_star)] += d
    return asg, loads


def priority_order(completion: Mapping[Hashable, float]) -> List[Hashable]:
    """Non-decreasing LP completion time; ties by item id."""
    def tie(item):
        # flows tie-break by (f, i, j)
        return (item[2], item[0], item[1]) if isinstance(item, tuple) else (item,)

    return sorted(completion, key=lambda it: (completion[it], tie(it)))
