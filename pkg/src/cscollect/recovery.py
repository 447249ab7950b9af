"""Sparse recovery: greedy pursuit, l1 minimization, and an exhaustive oracle.

All solvers run against the composed sensing matrix and the received sample
vector and return a RecoveryResult holding the coefficient estimate, the
synthesized signal, and solve diagnostics.
"""

import itertools
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

import numpy as np
import scipy.linalg
import scipy.optimize

from .channel import ChannelOutcome, outcome_to_selection
from .errors import (
    CombinatorialGuardError,
    SingularFitError,
    SolverFailureError,
)
from .lp_oracle import min_l1_objective
from .projections import ProjectionMatrix, SensingMatrix, compose_sensing_matrix
from .signals import Signal, SparseCoefficients, SparsifyingBasis, synthesize

_RANK_TOL = 1e-10
# strictly below _RANK_TOL so near-parallel real atoms still reach the
# pivot guard instead of being silently dropped
_ZERO_COL_TOL = 1e-12


class SolverKind(Enum):
    OMP = "omp"
    BP = "bp"


@dataclass(frozen=True)
class SolverParams:
    residual_tol: float = 1e-6
    max_sparsity: Optional[int] = None
    feasibility_tol: float = 1e-8


@dataclass(frozen=True)
class RecoveryResult:
    """Solver output.

    ``relative_error`` stays None until a caller with ground truth fills it
    in (see recovery_error).
    """

    coefficients: SparseCoefficients
    signal: Signal
    residual_norm: float
    iterations: int
    relative_error: Optional[float] = None

    def with_error(self, err: float) -> "RecoveryResult":
        return replace(self, relative_error=float(err))


def _entries(a: Union[SensingMatrix, np.ndarray]) -> np.ndarray:
    if isinstance(a, SensingMatrix):
        return a.entries
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("sensing operator must be a 2-D matrix")
    return arr


def _result(a, s_hat: np.ndarray, residual_norm: float, iterations: int,
            sparsity_hint: Optional[int] = None) -> RecoveryResult:
    coeffs = SparseCoefficients(values=s_hat, sparsity_hint=sparsity_hint)
    if isinstance(a, SensingMatrix):
        sig = synthesize(a.basis, coeffs)
    else:
        sig = Signal(samples=s_hat.copy())  # no basis attached: x == s
    return RecoveryResult(
        coefficients=coeffs,
        signal=sig,
        residual_norm=float(residual_norm),
        iterations=iterations,
    )


def omp_solve(
    a: Union[SensingMatrix, np.ndarray],
    y: np.ndarray,
    max_sparsity: Optional[int] = None,
    residual_tol: float = 1e-6,
) -> RecoveryResult:
    """Orthogonal matching pursuit with least-squares refit on the support.

    Each iteration picks the column most correlated with the residual,
    i.e. the largest |a_j . r| / ||a_j|| so unequal column norms cannot
    bias selection (exact ties go to the lowest index), refits all
    selected coefficients, and stops when either the residual drops to
    residual_tol * ||y||_2 or the support reaches max_sparsity (default
    rows // 2).  The Cholesky factor of the support Gram matrix is grown
    incrementally; a pivot below 1e-10 times the largest column norm raises
    SingularFitError with the offending iteration.
    """
    mat = _entries(a)
    y = np.asarray(y, dtype=np.float64)
    m, n = mat.shape
    if y.shape != (m,):
        raise ValueError(f"received vector has length {y.size}, expected {m}")
    if max_sparsity is None:
        max_sparsity = m // 2
    if max_sparsity < 0:
        raise ValueError("max_sparsity must be >= 0")

    col_norms = np.linalg.norm(mat, axis=0)
    max_col = float(col_norms.max()) if n else 0.0
    # a column at rounding-dust scale is a zero column whose direction is
    # noise; it must never win the normalized correlation
    viable = col_norms > _ZERO_COL_TOL * max_col
    safe_norms = np.where(viable, col_norms, 1.0)
    y_norm = float(np.linalg.norm(y))
    stop_norm = residual_tol * y_norm

    support: list = []
    chol = np.zeros((max_sparsity, max_sparsity))
    picked_cols = np.empty((m, max_sparsity))
    proj_y: list = []
    coef = np.zeros(0)
    r = y.copy()
    res_norm = y_norm

    while len(support) < max_sparsity and res_norm > stop_norm:
        scores = np.abs(mat.T @ r) / safe_norms
        scores[~viable] = 0.0
        j = int(np.argmax(scores))
        if scores[j] == 0.0:
            break
        if j in support:
            break  # residual numerically inside the selected span
        k = len(support)
        aj = mat[:, j]
        if k:
            b = picked_cols[:, :k].T @ aj
            w = scipy.linalg.solve_triangular(
                chol[:k, :k], b, lower=True, check_finite=False
            )
            d2 = float(aj @ aj - w @ w)
        else:
            w = np.zeros(0)
            d2 = float(aj @ aj)
        if d2 <= (_RANK_TOL * max_col) ** 2:
            raise SingularFitError(k)
        chol[k, :k] = w
        chol[k, k] = np.sqrt(d2)
        picked_cols[:, k] = aj
        support.append(j)
        proj_y.append(float(aj @ y))
        z = scipy.linalg.solve_triangular(
            chol[:k + 1, :k + 1], np.asarray(proj_y), lower=True, check_finite=False
        )
        coef = scipy.linalg.solve_triangular(
            chol[:k + 1, :k + 1].T, z, lower=False, check_finite=False
        )
        r = y - picked_cols[:, :k + 1] @ coef
        res_norm = float(np.linalg.norm(r))

    s_hat = np.zeros(n)
    if support:
        s_hat[support] = coef
    # recompute the final residual from scratch; must match the tracked one
    final_res = float(np.linalg.norm(y - mat @ s_hat))
    return _result(a, s_hat, final_res, iterations=len(support))


def bp_solve(
    a: Union[SensingMatrix, np.ndarray],
    y: np.ndarray,
    feasibility_tol: float = 1e-8,
) -> RecoveryResult:
    """Minimum-l1 recovery: min ||s||_1 subject to a s = y.

    Solved through the nonnegative split s = u - v as a linear program
    (HiGHS).  Requires a full-row-rank sensing matrix so the equality system
    is always feasible; the returned solution is checked against
    feasibility_tol * max(1, ||y||_2) and certified optimal on small
    instances by an exact simplex reformulation (see lp_oracle).
    """
    mat = _entries(a)
    y = np.asarray(y, dtype=np.float64)
    m, n = mat.shape
    if y.shape != (m,):
        raise ValueError(f"received vector has length {y.size}, expected {m}")
    if m == 0:
        return _result(a, np.zeros(n), 0.0, iterations=0)
    if np.linalg.matrix_rank(mat) < m:
        raise ValueError("sensing matrix is not full row rank")

    c = np.ones(2 * n)
    a_split = np.hstack([mat, -mat])
    res = scipy.optimize.linprog(
        c, A_eq=a_split, b_eq=y, bounds=(0, None), method="highs"
    )
    if not res.success or res.x is None:
        raise SolverFailureError(f"l1 program failed: {res.message}",
                                 best=res.x)
    s_hat = res.x[:n] - res.x[n:]
    residual = float(np.linalg.norm(mat @ s_hat - y))
    if residual > feasibility_tol * max(1.0, float(np.linalg.norm(y))):
        raise SolverFailureError(
            f"l1 solution infeasible: residual {residual:.3e}", best=s_hat
        )
    return _result(a, s_hat, residual, iterations=int(res.nit))


def l0_oracle(
    a: Union[SensingMatrix, np.ndarray],
    y: np.ndarray,
    max_sparsity: int,
    residual_tol: float = 1e-8,
) -> RecoveryResult:
    """Exhaustive minimum-support solver.

    Scans supports in order of size 0, 1, ..., max_sparsity (lexicographic
    within a size) and returns the first least-squares fit whose residual is
    at most residual_tol * ||y||_2.  Guarded: any C(n, k) above 1e6 raises
    CombinatorialGuardError.  Returns the all-zero solution tagged with the
    final residual when no support fits.
    """
    mat = _entries(a)
    y = np.asarray(y, dtype=np.float64)
    m, n = mat.shape
    if y.shape != (m,):
        raise ValueError(f"received vector has length {y.size}, expected {m}")
    if not 0 <= max_sparsity <= n:
        raise ValueError("need 0 <= max_sparsity <= cols")
    for k in range(max_sparsity + 1):
        if math.comb(n, k) > 1_000_000:
            raise CombinatorialGuardError(
                f"C({n}, {k}) exceeds the 1e6 enumeration guard"
            )
    y_norm = float(np.linalg.norm(y))
    tol = residual_tol * y_norm
    if y_norm <= 0.0:
        return _result(a, np.zeros(n), 0.0, iterations=0, sparsity_hint=0)
    best = None
    for k in range(1, max_sparsity + 1):
        for combo in itertools.combinations(range(n), k):
            cols = mat[:, combo]
            sol, _, _, _ = np.linalg.lstsq(cols, y, rcond=None)
            res = float(np.linalg.norm(y - cols @ sol))
            if res <= tol:
                s_hat = np.zeros(n)
                s_hat[list(combo)] = sol
                return _result(a, s_hat, res, iterations=k, sparsity_hint=k)
            if best is None or res < best[0]:
                best = (res, combo, sol)
    s_hat = np.zeros(n)
    res_norm = y_norm
    if best is not None:
        res_norm, combo, sol = best
        s_hat[list(combo)] = sol
    return _result(a, s_hat, res_norm, iterations=max_sparsity)


def count_l0_solutions(
    a: Union[SensingMatrix, np.ndarray],
    y: np.ndarray,
    size: int,
    residual_tol: float = 1e-8,
) -> int:
    """Number of supports of exactly ``size`` whose LS fit meets the residual
    tolerance; used to decide whether an oracle solution is unique."""
    mat = _entries(a)
    y = np.asarray(y, dtype=np.float64)
    n = mat.shape[1]
    if math.comb(n, size) > 1_000_000:
        raise CombinatorialGuardError(f"C({n}, {size}) exceeds the 1e6 guard")
    tol = residual_tol * float(np.linalg.norm(y))
    hits = 0
    for combo in itertools.combinations(range(n), size):
        cols = mat[:, combo]
        sol, _, _, _ = np.linalg.lstsq(cols, y, rcond=None)
        if float(np.linalg.norm(y - cols @ sol)) <= tol:
            hits += 1
    return hits


def certified_min_l1(a: Union[SensingMatrix, np.ndarray], y: np.ndarray) -> float:
    """Exact minimum l1 objective by the independent simplex route."""
    return min_l1_objective(_entries(a), np.asarray(y, dtype=np.float64))


def recovery_error(truth, estimate) -> float:
    """Relative l2 error ||x - x_hat|| / ||x||; zero ground truth rejected."""
    x = truth.samples if isinstance(truth, Signal) else np.asarray(truth, dtype=float)
    xh = estimate.samples if isinstance(estimate, Signal) else np.asarray(
        estimate, dtype=float)
    if x.shape != xh.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {xh.shape}")
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        raise ValueError("ground truth has zero norm")
    return float(np.linalg.norm(x - xh)) / nx


def recover_signal(
    outcome: ChannelOutcome,
    projection: ProjectionMatrix,
    basis: SparsifyingBasis,
    solver: SolverKind = SolverKind.OMP,
    params: Optional[SolverParams] = None,
) -> RecoveryResult:
    """End-to-end recovery from a channel outcome.

    Builds the selection matrix from the outcome, composes the sensing
    matrix, and dispatches to the requested solver.
    """
    if outcome.received_values is None:
        raise ValueError("outcome carries no sample values (parsed record?)")
    params = params or SolverParams()
    sel = outcome_to_selection(outcome)
    sensing = compose_sensing_matrix(sel, projection, basis)
    if solver is SolverKind.OMP:
        return omp_solve(
            sensing,
            outcome.received_values,
            max_sparsity=params.max_sparsity,
            residual_tol=params.residual_tol,
        )
    if solver is SolverKind.BP:
        return bp_solve(sensing, outcome.received_values,
                        feasibility_tol=params.feasibility_tol)
    raise ValueError(f"unknown solver {solver!r}")
