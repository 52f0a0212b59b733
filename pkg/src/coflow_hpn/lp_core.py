"""Sparse linear programs, two solver routes, and CPLEX-LP text export.

All variables are non-negative and the objective is always minimised.  The
default route hands the matrix to HiGHS through scipy; the
``"simplex"`` route is the in-house revised simplex in :mod:`.simplex`, kept
as an independent check for desk-sized programs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

EPS_FEAS = 1e-7
EPS_OPT = 1e-6
IPM_NNZ = 100_000

LE, EQ, GE = "<=", "=", ">="
_SENSES = (LE, EQ, GE)

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


class LpError(RuntimeError):
    pass


class IterationLimitError(LpError):
    pass


class LpTooLargeError(LpError):
    """The program exceeds the internal size cap; use :func:`export_lp` instead."""


@dataclass
class LinearProgram:
    """``min c.x`` subject to sparse rows ``a.x (<=|=|>=) b`` and ``x >= 0``."""

    name: str = "lp"
    variables: List[str] = field(default_factory=list)
    objective: Dict[int, float] = field(default_factory=dict)
    senses: List[str] = field(default_factory=list)
    rhs: List[float] = field(default_factory=list)
    row_names: List[str] = field(default_factory=list)
    # COO triplets of the constraint matrix
    _rows: List[int] = field(default_factory=list, repr=False)
    _cols: List[int] = field(default_factory=list, repr=False)
    _vals: List[float] = field(default_factory=list, repr=False)
    _index: Dict[str, int] = field(default_factory=dict, repr=False)

    def add_variable(self, name: str) -> int:
        if name in self._index:
            raise LpError(f"duplicate variable {name!r}")
        self._index[name] = len(self.variables)
        self.variables.append(name)
        return self._index[name]

    def index(self, name: str) -> int:
        return self._index[name]

    def has_variable(self, name: str) -> bool:
        return name in self._index

    def set_objective(self, coeffs: Dict[int, float]) -> None:
        self.objective = {int(k): float(v) for k, v in coeffs.items() if v != 0}

    def add_constraint(self, cols: Sequence[int], vals: Sequence[float], sense: str,
                       rhs: float, name: Optional[str] = None) -> int:
        if sense not in _SENSES:
            raise LpError(f"unknown relation {sense!r}")
        if not math.isfinite(rhs):
            raise LpError("rhs must be finite")
        if len(cols) != len(vals):
            raise LpError("cols/vals length mismatch")
        nvar = len(self.variables)
        r = len(self.senses)
        for c in cols:
            if not 0 <= c < nvar:
                raise LpError(f"constraint references undeclared variable index {c}")
        self._rows.extend([r] * len(cols))
        self._cols.extend(int(c) for c in cols)
        self._vals.extend(float(v) for v in vals)
        self.senses.append(sense)
        self.rhs.append(float(rhs))
        self.row_names.append(name or f"c{r + 1}")
        return r

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.senses)

    @property
    def nnz(self) -> int:
        return len(self._vals)

    def matrix(self) -> sparse.csr_matrix:
        """Constraint matrix; duplicate (row, col) entries are summed."""
        return sparse.csr_matrix(
            (np.asarray(self._vals, dtype=float),
             (np.asarray(self._rows, dtype=np.int64), np.asarray(self._cols, dtype=np.int64))),
            shape=(self.num_constraints, self.num_variables),
        )

    def cost_vector(self) -> np.ndarray:
        c = np.zeros(self.num_variables)
        for k, v in self.objective.items():
            c[k] = v
        return c

    def row(self, r: int) -> Dict[int, float]:
        A = self.matrix()
        lo, hi = A.indptr[r], A.indptr[r + 1]
        return dict(zip(A.indices[lo:hi].tolist(), A.data[lo:hi].tolist()))


@dataclass
class LpSolution:
    status: str
    objective_value: float
    values: Dict[str, float]
    x: Optional[np.ndarray] = field(default=None, repr=False)
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def __getitem__(self, name: str) -> float:
        return self.values[name]


def max_violation(lp: LinearProgram, x: np.ndarray) -> float:
    """Largest constraint or sign violation of ``x`` in ``lp``."""
    if lp.num_constraints == 0:
        return float(max(0.0, -x.min())) if x.size else 0.0
    ax = lp.matrix() @ x
    b = np.asarray(lp.rhs)
    senses = np.asarray(lp.senses)
    viol = np.zeros_like(b)
    le, ge, eq = senses == LE, senses == GE, senses == EQ
    viol[le] = np.maximum(ax[le] - b[le], 0)
    viol[ge] = np.maximum(b[ge] - ax[ge], 0)
    viol[eq] = np.abs(ax[eq] - b[eq])
    neg = max(0.0, float(-x.min())) if x.size else 0.0
    return max(float(viol.max()), neg)


def _scaled_violation(lp: LinearProgram, x: np.ndarray) -> float:
    # relative to the magnitude of each row so large-coefficient rows are judged fairly
    if lp.num_constraints == 0:
        return max_violation(lp, x)
    A = lp.matrix()
    ax = A @ x
    b = np.asarray(lp.rhs)
    scale = np.maximum(1.0, np.maximum(np.abs(b), abs(A) @ np.abs(x)))
    senses = np.asarray(lp.senses)
    viol = np.where(senses == LE, np.maximum(ax - b, 0),
                    np.where(senses == GE, np.maximum(b - ax, 0), np.abs(ax - b)))
    return max(float((viol / scale).max()), max(0.0, float(-x.min())))


def _solve_highs(lp: LinearProgram) -> LpSolution:
    A = lp.matrix()
    c = lp.cost_vector()
    senses = np.asarray(lp.senses)
    b = np.asarray(lp.rhs, dtype=float)
    le, ge, eq = senses == LE, senses == GE, senses == EQ
    A_ub = sparse.vstack([A[le], -A[ge]]) if (le.any() or ge.any()) else None
    b_ub = np.concatenate([b[le], -b[ge]]) if A_ub is not None else None
    A_eq = A[eq] if eq.any() else None
    b_eq = b[eq] if eq.any() else None
    # dual simplex for small programs; interior point + crossover (still a vertex) for big ones
    method = "highs-ds" if lp.nnz < IPM_NNZ else "highs-ipm"
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None),
                  method=method,
                  options={"primal_feasibility_tolerance": 1e-9, "dual_feasibility_tolerance": 1e-9})
    if res.status == 2:
        return LpSolution(INFEASIBLE, math.nan, {})
    if res.status == 3:
        return LpSolution(UNBOUNDED, -math.inf, {})
    if res.status == 1:
        raise IterationLimitError(res.message)
    if res.status != 0:
        raise LpError(f"HiGHS failed: {res.message}")
    x = np.maximum(np.asarray(res.x, dtype=float), 0.0)
    return LpSolution(OPTIMAL, float(c @ x), dict(zip(lp.variables, x.tolist())), x,
                      int(getattr(res, "nit", 0)))


def solve_lp(lp: LinearProgram, method: str = "highs", max_pivots: int = 10**6) -> LpSolution:
    """Solve ``lp`` to optimality.

    ``method`` is ``"highs"`` (HiGHS via scipy) or ``"simplex"`` (the
    in-house revised simplex).  Infeasible and unbounded programs come back as
    statuses, never exceptions; an exhausted pivot budget raises
    :class:`IterationLimitError`.
    """
    if lp.num_variables == 0:
        raise LpError("LP has no variables")
    if method == "highs":
        sol = _solve_highs(lp)
    elif method == "simplex":
        from .simplex import solve_standard

        sol = solve_standard(lp, max_pivots=max_pivots)
    else:
        raise ValueError(f"unknown LP method {method!r}")
    if sol.optimal and _scaled_violation(lp, sol.x) > EPS_FEAS:
        raise LpError(f"solver returned a point violating constraints by "
                      f"{_scaled_violation(lp, sol.x):.3g}")
    return sol


# -- CPLEX LP text format -----------------------------------------------------

_WRAP = 200


def _fmt(v: float) -> str:
    return repr(float(v))


def _terms(pairs: Iterable[Tuple[str, float]]) -> List[str]:
    out = []
    for name, v in pairs:
        sign = "-" if v < 0 else "+"
        out.append(f"{sign} {_fmt(abs(v))} {name}")
    return out


def _wrap(head: str, tokens: List[str]) -> List[str]:
    lines, cur = [], head
    for tok in tokens:
        if len(cur) + len(tok) + 1 > _WRAP and cur.strip():
            lines.append(cur)
            cur = "   "
        cur += " " + tok
    lines.append(cur)
    return lines


def export_lp(lp: LinearProgram) -> str:
    """Render ``lp`` in CPLEX LP format (names preserved, one bound per variable)."""
    names = lp.variables
    out = [f"\\ {lp.name}", "Minimize"]
    obj = _terms((names[k], v) for k, v in sorted(lp.objective.items()))
    out += _wrap(" obj:", obj or [f"+ 0.0 {names[0]}"])
    out.append("Subject To")
    A = lp.matrix()
    for r in range(lp.num_constraints):
        lo, hi = A.indptr[r], A.indptr[r + 1]
        terms = _terms((names[c], v) for c, v in zip(A.indices[lo:hi], A.data[lo:hi]))
        tail = [lp.senses[r], _fmt(lp.rhs[r])]
        out += _wrap(f" {lp.row_names[r]}:", (terms or [f"+ 0.0 {names[0]}"]) + tail)
    out.append("Bounds")
    out += [f" {v} >= 0" for v in names]
    out.append("End")
    return "\n".join(out) + "\n"


_SECTION = re.compile(r"^(minimize|subject to|bounds|end)\s*$", re.I)


def parse_lp(text: str) -> LinearProgram:
    """Read back the subset of CPLEX LP format that :func:`export_lp` writes."""
    sections: Dict[str, List[str]] = {}
    current = None
    name = "lp"
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            if current is None:
                name = line[1:].strip() or name
            continue
        m = _SECTION.match(line)
        if m:
            current = m.group(1).lower()
            sections.setdefault(current, [])
            continue
        if current is None:
            raise LpError(f"text outside any section: {line!r}")
        sections[current].append(line)

    lp = LinearProgram(name=name)
    for line in sections.get("bounds", []):
        var, rel, val = line.split()
        if rel != ">=" or float(val) != 0.0:
            raise LpError(f"unsupported bound {line!r}")
        lp.add_variable(var)

    def linear(tokens: List[str]) -> Dict[int, float]:
        coeffs: Dict[int, float] = {}
        for k in range(0, len(tokens), 3):
            sign, val, var = tokens[k:k + 3]
            if not lp.has_variable(var):
                lp.add_variable(var)
            coeffs[lp.index(var)] = coeffs.get(lp.index(var), 0.0) + (
                float(val) if sign == "+" else -float(val))
        return coeffs

    obj_tokens = " ".join(sections.get("minimize", [])).split()
    if obj_tokens and obj_tokens[0].endswith(":"):
        obj_tokens = obj_tokens[1:]
    objective = linear(obj_tokens)

    tokens = " ".join(sections.get("subject to", [])).split()
    pos = 0
    while pos < len(tokens):
        label = tokens[pos]
        if not label.endswith(":"):
            raise LpError(f"expected constraint label, got {label!r}")
        pos += 1
        end = pos
        while tokens[end] not in _SENSES:
            end += 1
        coeffs = linear(tokens[pos:end])
        sense, rhs = tokens[end], float(tokens[end + 1])
        cols = sorted(coeffs)
        lp.add_constraint(cols, [coeffs[c] for c in cols], sense, rhs, name=label[:-1])
        pos = end + 2
    lp.set_objective(objective)
    return lp
