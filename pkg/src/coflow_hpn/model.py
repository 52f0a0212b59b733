"""Instances of the coflow scheduling problem on heterogeneous parallel cores.

An instance is ``N`` input ports, ``N`` output ports, ``m`` network cores
(each an ``N x N`` non-blocking switch with uniform link speed) and ``n``
coflows.  Demand matrices are stored sparse: only positive ``(i, j)``
entries are kept.  Ports are 1-based throughout.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Mapping, Tuple

FORMAT_TAG = "coflow-hpn/1"

FlowKey = Tuple[int, int, int]  # (src port i, dst port j, coflow id f)


class InstanceError(ValueError):
    """Raised when an instance is malformed or violates a model invariant."""


@dataclass(frozen=True)
class Core:
    id: int
    speed: float

    def __post_init__(self):
        if not (self.speed > 0 and math.isfinite(self.speed)):
            raise InstanceError(f"core {self.id}: speed must be positive, got {self.speed}")
        object.__setattr__(self, "speed", float(self.speed))


@dataclass(frozen=True)
class Coflow:
    id: int
    weight: float
    release: float
    demand: Mapping[Tuple[int, int], float]

    def __post_init__(self):
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise InstanceError(f"coflow {self.id}: weight must be positive, got {self.weight}")
        if not (self.release >= 0 and math.isfinite(self.release)):
            raise InstanceError(f"coflow {self.id}: release must be non-negative, got {self.release}")
        if not self.demand:
            raise InstanceError(f"coflow {self.id}: empty coflow (no flows)")
        for (i, j), d in self.demand.items():
            if d == 0:
                raise InstanceError(f"coflow {self.id}: zero-size flow ({i}, {j})")
            if not (d > 0 and math.isfinite(d)):
                raise InstanceError(f"coflow {self.id}: flow ({i}, {j}) has invalid size {d}")
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "release", float(self.release))
        # canonical (i, j) order so equality and iteration are stable
        object.__setattr__(self, "demand", {k: float(v) for k, v in sorted(self.demand.items())})

    def flows(self) -> Iterator[Tuple[FlowKey, float]]:
        for (i, j), d in self.demand.items():
            yield (i, j, self.id), d

    @property
    def total_demand(self) -> float:
        return sum(self.demand.values())


@dataclass(frozen=True)
class CoflowInstance:
    num_ports: int
    cores: Tuple[Core, ...]
    coflows: Tuple[Coflow, ...]
    _coflow_index: Dict[int, Coflow] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.num_ports < 1:
            raise InstanceError("num_ports must be >= 1")
        if not self.cores:
            raise InstanceError("instance needs at least one core")
        if not self.coflows:
            raise InstanceError("instance needs at least one coflow")
        cores = tuple(sorted(self.cores, key=lambda c: c.id))
        coflows = tuple(sorted(self.coflows, key=lambda c: c.id))
        if len({c.id for c in cores}) != len(cores):
            raise InstanceError("duplicate core id")
        if len({c.id for c in coflows}) != len(coflows):
            raise InstanceError("duplicate coflow id")
        for cf in coflows:
            for i, j in cf.demand:
                if not (1 <= i <= self.num_ports and 1 <= j <= self.num_ports):
                    raise InstanceError(
                        f"coflow {cf.id}: port index ({i}, {j}) out of range [1, {self.num_ports}]"
                    )
        object.__setattr__(self, "cores", cores)
        object.__setattr__(self, "coflows", coflows)
        object.__setattr__(self, "_coflow_index", {c.id: c for c in coflows})

    @property
    def m(self) -> int:
        return len(self.cores)

    @property
    def n(self) -> int:
        return len(self.coflows)

    def coflow(self, f: int) -> Coflow:
        return self._coflow_index[f]

    def core_speed(self, k: int) -> float:
        for c in self.cores:
            if c.id == k:
                return c.speed
        raise KeyError(k)

    def speeds(self) -> Dict[int, float]:
        return {c.id: c.speed for c in self.cores}

    def flows(self) -> List[Tuple[FlowKey, float]]:
        """All flows, ordered by coflow id then (i, j)."""
        return [fl for cf in self.coflows for fl in cf.flows()]

    @property
    def num_flows(self) -> int:
        return sum(len(cf.demand) for cf in self.coflows)

    def weights(self) -> Dict[int, float]:
        return {cf.id: cf.weight for cf in self.coflows}

    def releases(self) -> Dict[int, float]:
        return {cf.id: cf.release for cf in self.coflows}


@dataclass(frozen=True)
class PortLoads:
    """Per-coflow port loads; pairs absent from the maps have load 0."""

    input_load: Dict[Tuple[int, int], float]   # (i, f) -> L_if
    output_load: Dict[Tuple[int, int], float]  # (j, f) -> L_jf

    def input(self, i: int, f: int) -> float:
        return self.input_load.get((i, f), 0.0)

    def output(self, j: int, f: int) -> float:
        return self.output_load.get((j, f), 0.0)

    def inputs_of(self, f: int) -> Dict[int, float]:
        return {i: v for (i, g), v in self.input_load.items() if g == f}

    def outputs_of(self, f: int) -> Dict[int, float]:
        return {j: v for (j, g), v in self.output_load.items() if g == f}


def port_loads(instance: CoflowInstance) -> PortLoads:
    inp: Dict[Tuple[int, int], float] = defaultdict(float)
    out: Dict[Tuple[int, int], float] = defaultdict(float)
    for cf in instance.coflows:
        for (i, j), d in cf.demand.items():
            inp[(i, cf.id)] += d
            out[(j, cf.id)] += d
    return PortLoads(dict(inp), dict(out))


def bottleneck_load(instance: CoflowInstance) -> float:
    """Largest total load on any single port, summed over all coflows."""
    loads = port_loads(instance)
    per_in: Dict[int, float] = defaultdict(float)
    per_out: Dict[int, float] = defaultdict(float)
    for (i, _), v in loads.input_load.items():
        per_in[i] += v
    for (j, _), v in loads.output_load.items():
        per_out[j] += v
    return max(max(per_in.values()), max(per_out.values()))


def min_transfer_time(instance: CoflowInstance) -> float:
    """Smallest positive per-port transfer time, taken on the fastest core."""
    loads = port_loads(instance)
    s_max = max(c.speed for c in instance.cores)
    smallest = min(min(loads.input_load.values()), min(loads.output_load.values()))
    return smallest / s_max


def satisfies_unit_transfer(instance: CoflowInstance) -> bool:
    """Whether every positive port load needs at least one time unit on every core."""
    return min_transfer_time(instance) >= 1.0


def without_releases(instance: CoflowInstance) -> CoflowInstance:
    return replace(instance, coflows=tuple(replace(cf, release=0.0) for cf in instance.coflows))


def scaled(instance: CoflowInstance, factor: float) -> CoflowInstance:
    """Multiply every size and release by ``factor`` (all times scale by it too)."""
    coflows = tuple(
        replace(cf, release=cf.release * factor,
                demand={ij: d * factor for ij, d in cf.demand.items()})
        for cf in instance.coflows
    )
    return replace(instance, coflows=coflows)


# -- JSON I/O ---------------------------------------------------------------

def instance_to_dict(instance: CoflowInstance) -> dict:
    return {
        "format": FORMAT_TAG,
        "num_ports": instance.num_ports,
        "cores": [{"id": c.id, "speed": c.speed} for c in instance.cores],
        "coflows": [
            {
                "id": cf.id,
                "weight": cf.weight,
                "release": cf.release,
                "flows": [{"src": i, "dst": j, "size": d} for (i, j), d in cf.demand.items()],
            }
            for cf in instance.coflows
        ],
    }


def instance_from_dict(data: dict) -> CoflowInstance:
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object")
    if data.get("format") != FORMAT_TAG:
        raise InstanceError(f"missing or unsupported format tag (expected {FORMAT_TAG!r})")
    try:
        cores = [Core(int(c["id"]), float(c["speed"])) for c in data["cores"]]
        coflows = []
        for c in data["coflows"]:
            demand: Dict[Tuple[int, int], float] = {}
            for fl in c["flows"]:
                key = (int(fl["src"]), int(fl["dst"]))
                if key in demand:
                    raise InstanceError(f"coflow {c['id']}: duplicate flow {key}")
                demand[key] = float(fl["size"])
            coflows.append(Coflow(int(c["id"]), float(c["weight"]), float(c.get("release", 0.0)), demand))
        return CoflowInstance(int(data["num_ports"]), tuple(cores), tuple(coflows))
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed instance: {exc!r}") from exc


def load_instance(text: str) -> CoflowInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"parse error: {exc}") from exc
    return instance_from_dict(data)


def save_instance(instance: CoflowInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"
