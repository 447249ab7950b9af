"""Exact small-scale linear programming by two-phase dense simplex.

Written as an independent certification route for the l1 solver: it shares no
code with the production path.  Bland's rule is used throughout, so the pivot
sequence terminates; intended for instances with a few dozen variables.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

_PIVOT_TOL = 1e-9
_MAX_PIVOTS = 20_000


class LpInfeasibleError(RuntimeError):
    pass


class LpNumericsError(RuntimeError):
    pass


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    objective: float


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    for r in range(tableau.shape[0]):
        if r != row and tableau[r, col] != 0.0:
            tableau[r] -= tableau[r, col] * tableau[row]
    basis[row] = col


def _bland_minimize(tableau, basis, cost, active_cols) -> None:
    """Run simplex pivots until no reduced cost is positive (minimization)."""
    m = tableau.shape[0]
    for _ in range(_MAX_PIVOTS):
        cb = cost[basis]
        reduced = cb @ tableau[:, :-1] - cost
        entering = -1
        for j in active_cols:
            if j not in basis and reduced[j] > _PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return
        # ratio test, Bland tie-break on smallest basis column
        best_ratio, leaving = None, -1
        for i in range(m):
            a = tableau[i, entering]
            if a > _PIVOT_TOL:
                ratio = tableau[i, -1] / a
                if (best_ratio is None or ratio < best_ratio - _PIVOT_TOL
                        or (abs(ratio - best_ratio) <= _PIVOT_TOL
                            and basis[i] < basis[leaving])):
                    best_ratio, leaving = ratio, i
        if leaving < 0:
            raise LpNumericsError("unbounded direction encountered")
        _pivot(tableau, basis, leaving, entering)
    raise LpNumericsError(f"no convergence within {_MAX_PIVOTS} pivots")


def simplex_min(c: np.ndarray, a_eq: np.ndarray, b_eq: np.ndarray) -> LpSolution:
    """Solve min c.x subject to a_eq x = b_eq, x >= 0.

    Raises LpInfeasibleError when the feasible region is empty.
    """
    a = np.array(a_eq, dtype=np.float64)
    b = np.array(b_eq, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != b.size or a.shape[1] != c.size:
        raise ValueError("inconsistent LP dimensions")
    m, n = a.shape
    if m == 0:
        return LpSolution(x=np.zeros(n), objective=0.0)
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0

    # phase 1: artificials with unit cost
    tableau = np.hstack([a, np.eye(m), b[:, None]])
    basis = np.arange(n, n + m)
    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    _bland_minimize(tableau, basis, cost1, active_cols=range(n + m))
    phase1_obj = float(cost1[basis] @ tableau[:, -1])
    if phase1_obj > 1e-7:
        raise LpInfeasibleError(f"phase-1 objective {phase1_obj:.3e}")

    # drive leftover artificials out of the basis, dropping redundant rows
    keep_rows = []
    for i in range(m):
        if basis[i] >= n:
            pivot_col = -1
            for j in range(n):
                if abs(tableau[i, j]) > _PIVOT_TOL:
                    pivot_col = j
                    break
            if pivot_col < 0:
                continue  # redundant constraint
            _pivot(tableau, basis, i, pivot_col)
        keep_rows.append(i)
    tableau = tableau[keep_rows]
    basis = basis[keep_rows]

    # phase 2 on structural columns only
    tableau = np.hstack([tableau[:, :n], tableau[:, -1:]])
    cost2 = c
    _bland_minimize(tableau, basis, cost2, active_cols=range(n))

    x = np.zeros(n)
    for i, bj in enumerate(basis):
        if bj < n:
            x[bj] = tableau[i, -1]
    return LpSolution(x=x, objective=float(c @ x))


def min_l1_objective(a: np.ndarray, y: np.ndarray) -> float:
    """Exact minimum of ||s||_1 subject to a s = y via the split formulation.

    Variables s = u - v with u, v >= 0 and objective sum(u) + sum(v).
    """
    a = np.asarray(a, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = a.shape[1]
    c = np.ones(2 * n)
    a_split = np.hstack([a, -a])
    return simplex_min(c, a_split, y).objective
