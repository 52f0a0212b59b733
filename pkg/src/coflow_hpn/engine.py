"""Event-driven execution of an :class:`~coflow_hpn.schedulers.Assignment`.

Each core runs independently (a server has its own link to every core).
On a core, flows are served from a priority list: at every release or
completion the list is rescanned and a flow is granted its link ``(i, j)``
when both input port ``i`` and output port ``j`` are still free.  A granted
flow transmits alone at the core's full speed.  Grants are recomputed at
every event, so a lower-priority flow can be displaced (``preempt``) by a
higher-priority one.  When the assignment carries interval tags, a core
finishes all of its interval-``l`` flows before starting interval ``l+1``.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from .model import CoflowInstance, FlowKey
from .schedulers import DIVISIBLE, INDIVISIBLE, Assignment

TIME_TOL = 1e-12


class ScheduleError(ValueError):
    """Assignment does not match the instance."""


class MetricsError(RuntimeError):
    """Stored metrics disagree with the completions they summarise."""


class TraceEvent(NamedTuple):
    t: float
    core: int
    flow: FlowKey
    event: str  # release | start | preempt | finish

    def to_dict(self) -> dict:
        return {"t": self.t, "core": self.core, "flow": list(self.flow), "event": self.event}


@dataclass
class ScheduleResult:
    flow_completion: Dict[FlowKey, float]
    coflow_completion: Dict[int, float]
    makespan: float
    twct: float
    trace: List[TraceEvent] = field(default_factory=list, repr=False)
    flow_core: Dict[FlowKey, int] = field(default_factory=dict, repr=False)

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(ev.to_dict()) + "\n" for ev in self.trace)

    def rescaled(self, factor: float) -> "ScheduleResult":
        """Divide every time by ``factor`` (undoes :func:`coflow_hpn.model.scaled`)."""
        return ScheduleResult(
            {k: v / factor for k, v in self.flow_completion.items()},
            {k: v / factor for k, v in self.coflow_completion.items()},
            self.makespan / factor,
            self.twct / factor,
            [ev._replace(t=ev.t / factor) for ev in self.trace],
            dict(self.flow_core),
        )


# one flow as the core loop sees it: (priority key, flow key, size, release)
_Job = Tuple[tuple, FlowKey, float, float]


def run_core(core: int, speed: float, phases: Sequence[Sequence[_Job]],
             trace: Optional[List[TraceEvent]] = None, start: float = 0.0) -> Dict[FlowKey, float]:
    """Execute ``phases`` back to back on one core; returns flow completions."""
    done: Dict[FlowKey, float] = {}
    t = start
    for phase in phases:
        jobs = sorted(phase)
        remaining = {key: size for _, key, size, _ in jobs}
        release = {key: r for _, key, _, r in jobs}
        seen = set()
        running: List[FlowKey] = []
        while remaining:
            eligible = [key for _, key, _, _ in jobs
                        if key in remaining and release[key] <= t + TIME_TOL]
            if not eligible:
                t = min(release[k] for k in remaining)
                continue
            if trace is not None:
                for key in eligible:
                    if key not in seen:
                        seen.add(key)
                        trace.append(TraceEvent(t, core, key, "release"))
            busy_in, busy_out = set(), set()
            granted: List[FlowKey] = []
            for key in eligible:
                i, j, _ = key
                if i not in busy_in and j not in busy_out:
                    busy_in.add(i)
                    busy_out.add(j)
                    granted.append(key)
            if trace is not None:
                gset = set(granted)
                for key in running:
                    if key not in gset:
                        trace.append(TraceEvent(t, core, key, "preempt"))
                rset = set(running)
                for key in granted:
                    if key not in rset:
                        trace.append(TraceEvent(t, core, key, "start"))
            running = granted

            step = min(remaining[k] for k in granted) / speed
            future = [release[k] for k in remaining if release[k] > t + TIME_TOL]
            if future:
                step = min(step, min(future) - t)
            t_next = t + step
            finished = []
            for key in granted:
                left = remaining[key] - speed * step
                if left / speed <= TIME_TOL * max(1.0, t_next):
                    finished.append(key)
                else:
                    remaining[key] = left
            t = t_next
            for key in finished:
                del remaining[key]
                done[key] = t
                if trace is not None:
                    trace.append(TraceEvent(t, core, key, "finish"))
            running = [k for k in running if k not in finished]
    return done


def _jobs_for(instance: CoflowInstance, assignment: Assignment) -> Dict[int, List[List[_Job]]]:
    core_of = assignment.core_of()
    per_core: Dict[int, Dict[int, List[_Job]]] = defaultdict(lambda: defaultdict(list))
    seen: set = set()
    speeds = instance.speeds()
    for item, h in core_of.items():
        if h not in speeds:
            raise ScheduleError(f"unknown core {h}")
        if item not in assignment.priority:
            raise ScheduleError(f"item {item!r} has no priority")
        rank = assignment.priority[item]
        l = assignment.interval[item] if assignment.interval is not None else 0
        if assignment.mode == INDIVISIBLE:
            try:
                cf = instance.coflow(item)
            except KeyError:
                raise ScheduleError(f"unknown coflow {item!r}") from None
            for (i, j), d in cf.demand.items():
                key = (i, j, cf.id)
                per_core[h][l].append(((rank, i, j), key, d, cf.release))
                seen.add(key)
        else:
            i, j, f = item
            try:
                cf = instance.coflow(f)
                d = cf.demand[(i, j)]
            except KeyError:
                raise ScheduleError(f"unknown flow {item!r}") from None
            if item in seen:
                raise ScheduleError(f"flow {item!r} assigned twice")
            per_core[h][l].append(((rank,), item, d, cf.release))
            seen.add(item)
    all_flows = {key for key, _ in instance.flows()}
    if seen != all_flows or sum(len(v) for v in assignment.per_core.values()) != len(core_of):
        raise ScheduleError("assignment does not cover every flow exactly once")
    return {h: [phases[l] for l in sorted(phases)] for h, phases in per_core.items()}


def simulate(instance: CoflowInstance, assignment: Assignment) -> ScheduleResult:
    speeds = instance.speeds()
    trace: List[TraceEvent] = []
    flow_done: Dict[FlowKey, float] = {}
    flow_core: Dict[FlowKey, int] = {}
    for h, phases in sorted(_jobs_for(instance, assignment).items()):
        local: List[TraceEvent] = []
        done = run_core(h, speeds[h], phases, local)
        flow_done.update(done)
        flow_core.update({k: h for k in done})
        trace.extend(local)
    order = {"release": 0, "preempt": 1, "finish": 2, "start": 3}
    trace.sort(key=lambda ev: (ev.t, ev.core, order[ev.event], ev.flow))
    return _result(instance, flow_done, trace, flow_core)


def _result(instance, flow_done, trace=(), flow_core=None) -> ScheduleResult:
    coflow_done: Dict[int, float] = {}
    for (i, j, f), c in flow_done.items():
        coflow_done[f] = max(coflow_done.get(f, 0.0), c)
    twct = sum(cf.weight * coflow_done[cf.id] for cf in instance.coflows)
    return ScheduleResult(dict(sorted(flow_done.items())), dict(sorted(coflow_done.items())),
                          max(coflow_done.values()), twct, list(trace), dict(flow_core or {}))


def compute_metrics(result: ScheduleResult, instance: CoflowInstance) -> dict:
    """Recompute the objectives from the completions and cross-check them."""
    if result.flow_completion and not result.trace:
        raise MetricsError("completions present but the trace is empty")
    finishes = {ev.flow: ev.t for ev in result.trace if ev.event == "finish"}
    for key, c in result.flow_completion.items():
        if key in finishes and not math.isclose(finishes[key], c, rel_tol=1e-12, abs_tol=1e-12):
            raise MetricsError(f"flow {key}: trace finish {finishes[key]} != completion {c}")
        if key not in finishes:
            raise MetricsError(f"flow {key} never finishes in the trace")
    rows = []
    twct = 0.0
    makespan = 0.0
    for cf in instance.coflows:
        c = max(result.flow_completion[(i, j, cf.id)] for (i, j) in cf.demand)
        if c != result.coflow_completion.get(cf.id):
            raise MetricsError(f"coflow {cf.id}: completion {result.coflow_completion.get(cf.id)} != {c}")
        twct += cf.weight * c
        makespan = max(makespan, c)
        rows.append({"coflow": cf.id, "weight": cf.weight, "release": cf.release, "completion": c})
    if not math.isclose(twct, result.twct, rel_tol=1e-12, abs_tol=1e-12):
        raise MetricsError(f"stored twct {result.twct} != recomputed {twct}")
    if makespan != result.makespan:
        raise MetricsError(f"stored makespan {result.makespan} != recomputed {makespan}")
    return {"twct": twct, "makespan": makespan, "coflows": rows}


def port_exclusive(result: ScheduleResult) -> bool:
    """True when no (port, core) pair ever carries two flows at once, per the trace."""
    active: Dict[Tuple[str, int, int], Optional[FlowKey]] = {}
    order = {"preempt": 0, "finish": 1, "release": 2, "start": 3}
    for ev in sorted(result.trace, key=lambda e: (e.t, e.core, order[e.event])):
        i, j, _ = ev.flow
        ports = (("in", i, ev.core), ("out", j, ev.core))
        if ev.event == "start":
            for p in ports:
                if active.get(p) is not None:
                    return False
                active[p] = ev.flow
        elif ev.event in ("finish", "preempt"):
            for p in ports:
                if active.get(p) == ev.flow:
                    active[p] = None
    return True


# -- brute-force oracle -------------------------------------------------------

ORACLE_MAX_FLOWS = 8
ORACLE_MAX_CORES = 4
ORACLE_MAX_COFLOWS = 4

MAKESPAN, TWCT = "makespan", "twct"


class OracleSizeError(ValueError):
    pass


def _items_jobs(instance: CoflowInstance, mode: str):
    if mode == INDIVISIBLE:
        return {cf.id: [((0, i, j), (i, j, cf.id), d, cf.release) for (i, j), d in cf.demand.items()]
                for cf in instance.coflows}
    return {key: [((0,), key, d, instance.coflow(key[2]).release)] for key, d in instance.flows()}


def brute_force_optimum(instance: CoflowInstance, mode: str, objective: str) -> float:
    """Best objective over every core assignment and every priority list.

    Searches exactly the schedule class :func:`simulate` can produce.  The
    per-core subproblems are memoised, so makespan and indivisible TWCT
    decompose into independent core choices.
    """
    if instance.num_flows > ORACLE_MAX_FLOWS or instance.m > ORACLE_MAX_CORES \
            or instance.n > ORACLE_MAX_COFLOWS:
        raise OracleSizeError(
            f"oracle limited to {ORACLE_MAX_FLOWS} flows, {ORACLE_MAX_CORES} cores, "
            f"{ORACLE_MAX_COFLOWS} coflows")
    if mode not in (INDIVISIBLE, DIVISIBLE) or objective not in (MAKESPAN, TWCT):
        raise ValueError(f"bad oracle request {mode!r}/{objective!r}")
    jobs = _items_jobs(instance, mode)
    items = sorted(jobs, key=lambda it: (it[2], it[0], it[1]) if isinstance(it, tuple) else (it,))
    speeds = instance.speeds()
    weights = instance.weights()
    cores = sorted(speeds)

    def orders(core: int, subset: Tuple) -> Iterable[Dict[FlowKey, float]]:
        for perm in itertools.permutations(subset):
            phase = [((rank,) + jb[0][1:], jb[1], jb[2], jb[3])
                     for rank, it in enumerate(perm) for jb in jobs[it]]
            yield run_core(core, speeds[core], [phase])

    def value(done: Dict[FlowKey, float]) -> float:
        if objective == MAKESPAN:
            return max(done.values(), default=0.0)
        per_coflow: Dict[int, float] = {}
        for (_, _, f), c in done.items():
            per_coflow[f] = max(per_coflow.get(f, 0.0), c)
        return sum(weights[f] * c for f, c in per_coflow.items())

    separable = objective == MAKESPAN or mode == INDIVISIBLE
    memo: Dict[Tuple[int, Tuple], object] = {}

    def core_best(core: int, subset: Tuple):
        key = (core, subset)
        if key not in memo:
            if separable:
                memo[key] = min((value(d) for d in orders(core, subset)), default=0.0)
            else:
                memo[key] = list(orders(core, subset)) or [{}]
        return memo[key]

    best = math.inf
    for choice in itertools.product(cores, repeat=len(items)):
        subsets = {h: tuple(it for it, c in zip(items, choice) if c == h) for h in cores}
        if separable:
            parts = [core_best(h, subsets[h]) for h in cores]
            total = max(parts) if objective == MAKESPAN else sum(parts)
        else:
            total = math.inf
            for combo in itertools.product(*(core_best(h, subsets[h]) for h in cores)):
                merged: Dict[FlowKey, float] = {}
                for d in combo:
                    merged.update(d)
                total = min(total, value(merged))
        best = min(best, total)
    return best
