"""The four LP relaxations and decoding of their optima.

=========================  ==================  =============================
kind                       granularity         objective
=========================  ==================  =============================
``indivisible-makespan``   coflow -> core      makespan ``E``
``indivisible-twct``       coflow -> core, l   ``sum_f w_f C_f``
``divisible-makespan``     flow -> core        makespan ``E``
``divisible-twct``         flow -> core, l     ``sum_f w_f C_f``
=========================  ==================  =============================

The interval-indexed programs split time into ``[1, 2], (2, 4], ...,
(2^(L-1), 2^L]``; ``x[..., l]`` is the fraction of an item that completes
in interval ``l``.  Makespan programs ignore release times.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .lp_core import EQ, LE, LinearProgram, LpError, LpSolution, LpTooLargeError
from .model import CoflowInstance, bottleneck_load, port_loads

INDIV_MAKESPAN = "indivisible-makespan"
INDIV_TWCT = "indivisible-twct"
DIV_MAKESPAN = "divisible-makespan"
DIV_TWCT = "divisible-twct"

MAX_VARIABLES = 200_000
DECODE_TOL = 1e-5


class DecodeError(LpError):
    pass


@dataclass(frozen=True)
class Horizon:
    L: int

    @property
    def boundaries(self) -> List[float]:
        return [float(2 ** l) for l in range(self.L + 1)]

    def tau(self, l: int) -> float:
        return float(2 ** l)


def _ceil_log2(value: float) -> int:
    if value <= 1:
        return 0
    L = math.ceil(math.log2(value))
    while L > 0 and 2.0 ** (L - 1) >= value:
        L -= 1
    while 2.0 ** L < value:
        L += 1
    return L


def compute_horizon(instance: CoflowInstance) -> Horizon:
    s_min = min(c.speed for c in instance.cores)
    max_release = max(cf.release for cf in instance.coflows)
    arg = max_release + bottleneck_load(instance) / s_min
    return Horizon(max(1, _ceil_log2(arg)))


@dataclass
class RelaxationLP:
    """A built program together with the keys of its decision variables."""

    kind: str
    lp: LinearProgram
    horizon: Optional[Horizon]
    x_index: Dict[tuple, int] = field(default_factory=dict)
    coflow_c_index: Dict[int, int] = field(default_factory=dict)
    flow_c_index: Dict[Tuple[int, int, int], int] = field(default_factory=dict)
    makespan_index: Optional[int] = None

    @property
    def divisible(self) -> bool:
        return self.kind in (DIV_MAKESPAN, DIV_TWCT)

    @property
    def horizon_indexed(self) -> bool:
        return self.kind in (INDIV_TWCT, DIV_TWCT)


@dataclass
class FractionalAssignment:
    """Decoded LP optimum.

    ``x`` keys: ``(k, f)`` / ``(k, f, l)`` for indivisible programs and
    ``(k, i, j, f)`` / ``(k, i, j, f, l)`` for divisible ones; the core id is
    always the first element.
    """

    mode: str
    horizon_indexed: bool
    x: Dict[tuple, float]
    coflow_completion: Dict[int, float]
    flow_completion: Dict[Tuple[int, int, int], float]
    makespan: Optional[float]
    objective: float

    @property
    def divisible(self) -> bool:
        return self.mode == "divisible"

    def item_of(self, key: tuple):
        """Coflow id or flow key that an ``x`` key belongs to."""
        if self.divisible:
            return tuple(key[1:4])
        return key[1]

    def item_sums(self) -> Dict[object, float]:
        sums: Dict[object, float] = defaultdict(float)
        for key, v in self.x.items():
            sums[self.item_of(key)] += v
        return dict(sums)

    def marginals(self) -> Dict[object, Dict[int, float]]:
        """Per-item mass on each core, summed over intervals."""
        out: Dict[object, Dict[int, float]] = defaultdict(lambda: defaultdict(float))
        for key, v in self.x.items():
            out[self.item_of(key)][key[0]] += v
        return {item: dict(m) for item, m in out.items()}

    def completion_of(self, item) -> float:
        if self.divisible:
            return self.flow_completion[item]
        return self.coflow_completion[item]


def _check_size(nvars: int, allow_large: bool) -> None:
    if nvars > MAX_VARIABLES and not allow_large:
        raise LpTooLargeError(
            f"{nvars} variables exceed the internal cap of {MAX_VARIABLES}; export the LP instead")


def build_indivisible_makespan_lp(instance: CoflowInstance) -> RelaxationLP:
    loads = port_loads(instance)
    cores = instance.cores
    lp = LinearProgram(name=INDIV_MAKESPAN)
    out = RelaxationLP(INDIV_MAKESPAN, lp, None)
    for c in cores:
        for cf in instance.coflows:
            out.x_index[(c.id, cf.id)] = lp.add_variable(f"x_{c.id}_{cf.id}")
    for cf in instance.coflows:
        out.coflow_c_index[cf.id] = lp.add_variable(f"C_{cf.id}")
    E = out.makespan_index = lp.add_variable("E")
    lp.set_objective({E: 1.0})

    for cf in instance.coflows:
        f = cf.id
        xs = [out.x_index[(c.id, f)] for c in cores]
        lp.add_constraint(xs, [1.0] * len(xs), EQ, 1.0, f"a_{f}")
        for side, port_map in (("b", loads.inputs_of(f)), ("c", loads.outputs_of(f))):
            for p, load in sorted(port_map.items()):
                lp.add_constraint(xs + [out.coflow_c_index[f]],
                                  [load / c.speed for c in cores] + [-1.0], LE, 0.0, f"{side}_{f}_{p}")
    for side, table in (("f", loads.input_load), ("g", loads.output_load)):
        by_port: Dict[int, List[Tuple[int, float]]] = defaultdict(list)
        for (p, f), load in table.items():
            by_port[p].append((f, load))
        for p in sorted(by_port):
            for c in cores:
                cols = [out.x_index[(c.id, f)] for f, _ in by_port[p]] + [E]
                vals = [load / c.speed for _, load in by_port[p]] + [-1.0]
                lp.add_constraint(cols, vals, LE, 0.0, f"{side}_{p}_{c.id}")
    for cf in instance.coflows:
        lp.add_constraint([out.coflow_c_index[cf.id], E], [1.0, -1.0], LE, 0.0, f"h_{cf.id}")
    return out


def build_divisible_makespan_lp(instance: CoflowInstance) -> RelaxationLP:
    cores = instance.cores
    flows = instance.flows()
    lp = LinearProgram(name=DIV_MAKESPAN)
    out = RelaxationLP(DIV_MAKESPAN, lp, None)
    for c in cores:
        for (i, j, f), _ in flows:
            out.x_index[(c.id, i, j, f)] = lp.add_variable(f"x_{c.id}_{i}_{j}_{f}")
    for key, _ in flows:
        out.flow_c_index[key] = lp.add_variable("C_%d_%d_%d" % key)
    E = out.makespan_index = lp.add_variable("E")
    lp.set_objective({E: 1.0})

    for (i, j, f), d in flows:
        xs = [out.x_index[(c.id, i, j, f)] for c in cores]
        lp.add_constraint(xs, [1.0] * len(xs), EQ, 1.0, f"a_{i}_{j}_{f}")
        lp.add_constraint(xs + [out.flow_c_index[(i, j, f)]],
                          [d / c.speed for c in cores] + [-1.0], LE, 0.0, f"b_{i}_{j}_{f}")
    for side, pos in (("f", 0), ("g", 1)):
        by_port: Dict[int, list] = defaultdict(list)
        for key, d in flows:
            by_port[key[pos]].append((key, d))
        for p in sorted(by_port):
            for c in cores:
                cols = [out.x_index[(c.id,) + key] for key, _ in by_port[p]] + [E]
                vals = [d / c.speed for _, d in by_port[p]] + [-1.0]
                lp.add_constraint(cols, vals, LE, 0.0, f"{side}_{p}_{c.id}")
    for key, _ in flows:
        lp.add_constraint([out.flow_c_index[key], E], [1.0, -1.0], LE, 0.0, "h_%d_%d_%d" % key)
    return out


def build_indivisible_twct_lp(instance: CoflowInstance, horizon: Horizon,
                              allow_large: bool = False) -> RelaxationLP:
    loads = port_loads(instance)
    cores = instance.cores
    L = horizon.L
    _check_size(instance.m * instance.n * L + instance.n, allow_large)
    lp = LinearProgram(name=INDIV_TWCT)
    out = RelaxationLP(INDIV_TWCT, lp, horizon)
    for c in cores:
        for cf in instance.coflows:
            for l in range(1, L + 1):
                out.x_index[(c.id, cf.id, l)] = lp.add_variable(f"x_{c.id}_{cf.id}_{l}")
    for cf in instance.coflows:
        out.coflow_c_index[cf.id] = lp.add_variable(f"C_{cf.id}")
    lp.set_objective({out.coflow_c_index[cf.id]: cf.weight for cf in instance.coflows})

    for cf in instance.coflows:
        f = cf.id
        xs = [out.x_index[(c.id, f, l)] for c in cores for l in range(1, L + 1)]
        lp.add_constraint(xs, [1.0] * len(xs), EQ, 1.0, f"a_{f}")
        Cf = out.coflow_c_index[f]
        for side, port_map in (("b", loads.inputs_of(f)), ("c", loads.outputs_of(f))):
            for p, load in sorted(port_map.items()):
                vals = [load / c.speed for c in cores for _ in range(L)]
                lp.add_constraint(xs + [Cf], vals + [-1.0], LE, -cf.release, f"{side}_{f}_{p}")
        lp.add_constraint(xs + [Cf], [horizon.tau(l - 1) for _ in cores for l in range(1, L + 1)] + [-1.0],
                          LE, 0.0, f"h_{f}")
    for side, table in (("f", loads.input_load), ("g", loads.output_load)):
        by_port: Dict[int, List[Tuple[int, float]]] = defaultdict(list)
        for (p, f), load in table.items():
            by_port[p].append((f, load))
        for p in sorted(by_port):
            for c in cores:
                for l in range(1, L + 1):
                    cols = [out.x_index[(c.id, f, u)] for f, _ in by_port[p] for u in range(1, l + 1)]
                    vals = [load / c.speed for _, load in by_port[p] for _ in range(l)]
                    lp.add_constraint(cols, vals, LE, horizon.tau(l), f"{side}_{p}_{c.id}_{l}")
    return out


def build_divisible_twct_lp(instance: CoflowInstance, horizon: Horizon,
                            allow_large: bool = False) -> RelaxationLP:
    cores = instance.cores
    flows = instance.flows()
    L = horizon.L
    F = len(flows)
    _check_size(instance.m * F * L + F + instance.n, allow_large)
    lp = LinearProgram(name=DIV_TWCT)
    out = RelaxationLP(DIV_TWCT, lp, horizon)
    for c in cores:
        for (i, j, f), _ in flows:
            for l in range(1, L + 1):
                out.x_index[(c.id, i, j, f, l)] = lp.add_variable(f"x_{c.id}_{i}_{j}_{f}_{l}")
    for key, _ in flows:
        out.flow_c_index[key] = lp.add_variable("C_%d_%d_%d" % key)
    for cf in instance.coflows:
        out.coflow_c_index[cf.id] = lp.add_variable(f"C_{cf.id}")
    lp.set_objective({out.coflow_c_index[cf.id]: cf.weight for cf in instance.coflows})
    release = instance.releases()

    taus = [horizon.tau(l - 1) for l in range(1, L + 1)]
    for key, d in flows:
        i, j, f = key
        xs = [out.x_index[(c.id, i, j, f, l)] for c in cores for l in range(1, L + 1)]
        Cij = out.flow_c_index[key]
        lp.add_constraint(xs, [1.0] * len(xs), EQ, 1.0, f"a_{i}_{j}_{f}")
        lp.add_constraint(xs + [Cij], [d / c.speed for c in cores for _ in range(L)] + [-1.0],
                          LE, -release[f], f"b_{i}_{j}_{f}")
        lp.add_constraint(xs + [Cij], taus * len(cores) + [-1.0], LE, 0.0, f"h_{i}_{j}_{f}")
        lp.add_constraint([Cij, out.coflow_c_index[f]], [1.0, -1.0], LE, 0.0, f"j_{i}_{j}_{f}")
    for side, pos in (("f", 0), ("g", 1)):
        by_port: Dict[int, list] = defaultdict(list)
        for key, d in flows:
            by_port[key[pos]].append((key, d))
        for p in sorted(by_port):
            members = by_port[p]
            for c in cores:
                cols: List[int] = []
                vals: List[float] = []
                for l in range(1, L + 1):
                    # prefix rows grow by the interval-l columns of every member
                    for key, d in members:
                        cols.append(out.x_index[(c.id,) + key + (l,)])
                        vals.append(d / c.speed)
                    lp.add_constraint(cols, vals, LE, horizon.tau(l), f"{side}_{p}_{c.id}_{l}")
    return out


def build(kind: str, instance: CoflowInstance, horizon: Optional[Horizon] = None,
          allow_large: bool = False) -> RelaxationLP:
    if kind == INDIV_MAKESPAN:
        return build_indivisible_makespan_lp(instance)
    if kind == DIV_MAKESPAN:
        return build_divisible_makespan_lp(instance)
    horizon = horizon or compute_horizon(instance)
    if kind == INDIV_TWCT:
        return build_indivisible_twct_lp(instance, horizon, allow_large)
    if kind == DIV_TWCT:
        return build_divisible_twct_lp(instance, horizon, allow_large)
    raise ValueError(f"unknown relaxation {kind!r}")


def decode_solution(relax: RelaxationLP, solution: LpSolution) -> FractionalAssignment:
    if not solution.optimal:
        raise DecodeError(f"cannot decode a {solution.status} solution")
    v = solution.x
    x = {key: min(1.0, max(0.0, float(v[idx]))) for key, idx in relax.x_index.items()}
    fa = FractionalAssignment(
        mode="divisible" if relax.divisible else "indivisible",
        horizon_indexed=relax.horizon_indexed,
        x=x,
        coflow_completion={f: float(v[idx]) for f, idx in relax.coflow_c_index.items()},
        flow_completion={k: float(v[idx]) for k, idx in relax.flow_c_index.items()},
        makespan=float(v[relax.makespan_index]) if relax.makespan_index is not None else None,
        objective=solution.objective_value,
    )
    verify_assignment_sums(fa)
    return fa


def verify_assignment_sums(fa: FractionalAssignment, tol: float = DECODE_TOL) -> None:
    for item, total in fa.item_sums().items():
        if abs(total - 1.0) > tol:
            raise DecodeError(f"assignment mass of {item} is {total:.9g}, expected 1")
