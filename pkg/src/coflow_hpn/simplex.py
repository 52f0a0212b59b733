"""Dense two-phase revised simplex.

Meant for desk-sized programs (a few hundred rows).  Pricing is Dantzig's
rule; after ``10 * (rows + cols)`` consecutive degenerate pivots the solver
switches permanently to Bland's rule, which cannot cycle.
"""

from __future__ import annotations

import math

import numpy as np

from .lp_core import (EQ, GE, INFEASIBLE, LE, OPTIMAL, UNBOUNDED, IterationLimitError,
                      LinearProgram, LpSolution)

_TOL = 1e-9
_REINVERT = 64


class _State:
    def __init__(self, A, b, basis, artificial):
        self.A = A
        self.b = b
        self.basis = list(basis)
        self.artificial = artificial
        self.pivots = 0
        self.reinvert()

    def reinvert(self):
        self.Binv = np.linalg.inv(self.A[:, self.basis])
        self.xB = self.Binv @ self.b
        self.since_reinvert = 0


def _iterate(st: _State, cost: np.ndarray, allowed: np.ndarray, max_pivots: int,
             guard_artificials: bool) -> str:
    rows, cols = st.A.shape
    degenerate_run = 0
    bland = False
    limit = 10 * (rows + cols)
    while True:
        if st.pivots >= max_pivots:
            raise IterationLimitError(f"pivot budget {max_pivots} exhausted")
        y = cost[st.basis] @ st.Binv
        reduced = cost - y @ st.A
        in_basis = np.zeros(cols, dtype=bool)
        in_basis[st.basis] = True
        cand = allowed & ~in_basis & (reduced < -_TOL)
        if not cand.any():
            return OPTIMAL
        idx = np.flatnonzero(cand)
        q = int(idx[0]) if bland else int(idx[np.argmin(reduced[idx])])

        u = st.Binv @ st.A[:, q]
        best, leave = math.inf, -1
        for r in range(rows):
            if guard_artificials and st.artificial[st.basis[r]] and abs(u[r]) > _TOL:
                ratio = 0.0
            elif u[r] > _TOL:
                ratio = max(st.xB[r], 0.0) / u[r]
            else:
                continue
            if ratio < best - 1e-12 or (abs(ratio - best) <= 1e-12 and st.basis[r] < st.basis[leave]):
                best, leave = ratio, r
        if leave < 0:
            return UNBOUNDED

        degenerate_run = degenerate_run + 1 if best <= _TOL else 0
        if degenerate_run > limit:
            bland = True

        # eta update of the basis inverse
        piv = u[leave]
        st.xB = st.xB - best * u
        st.xB[leave] = best
        row = st.Binv[leave] / piv
        st.Binv = st.Binv - np.outer(u, row)
        st.Binv[leave] = row
        st.basis[leave] = q
        st.pivots += 1
        st.since_reinvert += 1
        if st.since_reinvert >= _REINVERT:
            st.reinvert()


def solve_standard(lp: LinearProgram, max_pivots: int = 10**6) -> LpSolution:
    n = lp.num_variables
    M = lp.matrix().toarray()
    b = np.asarray(lp.rhs, dtype=float).copy()
    senses = list(lp.senses)
    rows = len(senses)
    c = lp.cost_vector()

    for r in range(rows):
        if b[r] < 0:
            M[r] *= -1
            b[r] *= -1
            senses[r] = {LE: GE, GE: LE, EQ: EQ}[senses[r]]

    slack_rows = [r for r in range(rows) if senses[r] != EQ]
    art_rows = [r for r in range(rows) if senses[r] != LE]
    ns, na = len(slack_rows), len(art_rows)
    A = np.zeros((rows, n + ns + na))
    A[:, :n] = M
    basis = [-1] * rows
    for k, r in enumerate(slack_rows):
        A[r, n + k] = 1.0 if senses[r] == LE else -1.0
        if senses[r] == LE:
            basis[r] = n + k
    for k, r in enumerate(art_rows):
        A[r, n + ns + k] = 1.0
        basis[r] = n + ns + k
    artificial = np.zeros(A.shape[1], dtype=bool)
    artificial[n + ns:] = True

    if rows == 0:
        if (c < 0).any():
            return LpSolution(UNBOUNDED, -math.inf, {})
        x = np.zeros(n)
        return LpSolution(OPTIMAL, 0.0, dict(zip(lp.variables, x.tolist())), x)

    st = _State(A, b, basis, artificial)
    if na:
        phase1 = artificial.astype(float)
        _iterate(st, phase1, np.ones(A.shape[1], dtype=bool), max_pivots, guard_artificials=False)
        st.reinvert()
        if phase1[st.basis] @ st.xB > 1e-7 * max(1.0, float(np.abs(b).max())):
            return LpSolution(INFEASIBLE, math.nan, {}, iterations=st.pivots)

    cost = np.zeros(A.shape[1])
    cost[:n] = c
    status = _iterate(st, cost, ~artificial, max_pivots, guard_artificials=True)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, -math.inf, {}, iterations=st.pivots)
    st.reinvert()
    full = np.zeros(A.shape[1])
    full[st.basis] = np.maximum(st.xB, 0.0)
    x = full[:n]
    return LpSolution(OPTIMAL, float(c @ x), dict(zip(lp.variables, x.tolist())), x, st.pivots)
