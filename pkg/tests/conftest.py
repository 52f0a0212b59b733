import pytest
from hypothesis import strategies as st

from coflow_hpn.model import Coflow, CoflowInstance, Core


def make_instance(speeds, coflows, N=None):
    """coflows: list of (weight, release, {(i, j): size})."""
    cores = tuple(Core(k, float(s)) for k, s in enumerate(speeds, start=1))
    cfs = tuple(Coflow(f, float(w), float(r), dict(d)) for f, (w, r, d) in enumerate(coflows, start=1))
    if N is None:
        N = max(max(max(i, j) for i, j in d) for _, _, d in coflows)
    return CoflowInstance(N, cores, cfs)


@pytest.fixture
def two_fours():
    """Two unit-weight coflows, each one 4-unit flow on (1, 1); cores of speed 1 and 2."""
    return make_instance([1, 2], [(1, 0, {(1, 1): 4}), (1, 0, {(1, 1): 4})])


@st.composite
def instances(draw, max_ports=3, max_cores=3, max_coflows=3, max_flows=None, releases=True):
    N = draw(st.integers(1, max_ports))
    m = draw(st.integers(1, max_cores))
    n = draw(st.integers(1, max_coflows))
    speeds = draw(st.lists(st.integers(1, 8), min_size=m, max_size=m))
    pairs = [(i, j) for i in range(1, N + 1) for j in range(1, N + 1)]
    coflows = []
    budget = max_flows
    for _ in range(n):
        cap = len(pairs) if budget is None else max(1, min(len(pairs), budget - (n - len(coflows) - 1)))
        chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=cap, unique=True))
        if budget is not None:
            budget -= len(chosen)
        sizes = draw(st.lists(st.integers(1, 40), min_size=len(chosen), max_size=len(chosen)))
        w = draw(st.integers(1, 10))
        r = draw(st.integers(0, 20)) if releases else 0
        coflows.append((w, r, dict(zip(chosen, sizes))))
    return make_instance(speeds, coflows, N=N)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
