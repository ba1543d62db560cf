"""Dantzig-type l1 minimisation and CLIME precision-matrix estimation.

``solve_dantzig`` computes

    beta = argmin ||beta||_1  s.t.  ||a @ beta - b||_inf <= lam

for a symmetric matrix ``a`` (a covariance estimate in every use within this
package).  ``solve_clime`` recovers a precision-matrix estimate column by
column by setting ``b`` to each standard basis vector in turn; the columns
are independent programs, so they may be computed in any order or in
parallel with bit-identical results.

Solutions are deterministic: the pivot rules of the underlying simplex
kernels break every tie by the lowest index, so a given problem always
yields the same vertex.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

import numpy as np

from . import _simplex
from .errors import (
    DimensionMismatch,
    InfeasibleProblem,
    InvalidParameter,
    PivotLimitExceeded,
    SolverError,
)
from .linalg import as_matrix, as_vector, check_symmetric

__all__ = [
    "DantzigProblem",
    "DantzigSolution",
    "solve_dantzig",
    "solve_clime_column",
    "solve_clime",
]

#: Feasibility slack allowed on a returned solution: the residual may exceed
#: lam by at most this much before the solution is rejected.
RESIDUAL_SLACK = 1e-7


@dataclass(frozen=True)
class DantzigProblem:
    """One l1-minimisation instance ``min ||beta||_1, ||a beta - b||_inf <= lam``.

    ``a`` must be square and symmetric to 1e-10 relative tolerance; ``lam``
    must be nonnegative and finite.
    """

    a: np.ndarray
    b: np.ndarray
    lam: float

    def __post_init__(self):
        a = as_matrix(self.a, "constraint matrix")
        b = as_vector(self.b, "target vector")
        check_symmetric(a, 1e-10, "constraint matrix")
        if b.shape[0] != a.shape[0]:
            raise DimensionMismatch(
                f"target vector has {b.shape[0]} entries, matrix is {a.shape[0]}x{a.shape[1]}"
            )
        lam = float(self.lam)
        if not np.isfinite(lam) or lam < 0.0:
            raise InvalidParameter(f"lam must be finite and >= 0, got {lam}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lam", lam)

    @property
    def dim(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class DantzigSolution:
    """Optimal vertex of a :class:`DantzigProblem`.

    ``objective`` is the attained l1 norm, ``residual_inf`` the constraint
    residual ``||a beta - b||_inf`` (always <= lam + 1e-7), ``iterations``
    the total simplex pivots spent.
    """

    beta: np.ndarray
    objective: float
    residual_inf: float
    iterations: int
    status: str = "optimal"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "objective": self.objective,
            "residual_inf": self.residual_inf,
            "iterations": self.iterations,
            "beta": [float(x) for x in self.beta],
        }


def _finish(problem: DantzigProblem, beta: np.ndarray, pivots: int) -> DantzigSolution | None:
    """Validate a candidate solution; None means it fails the residual check."""
    residual = problem.a @ beta - problem.b
    residual_inf = float(np.max(np.abs(residual))) if residual.size else 0.0
    if residual_inf > problem.lam + RESIDUAL_SLACK:
        return None
    return DantzigSolution(
        beta=beta,
        objective=float(np.sum(np.abs(beta))),
        residual_inf=residual_inf,
        iterations=pivots,
    )


def solve_dantzig(problem: DantzigProblem, max_pivots: int | None = None) -> DantzigSolution:
    """Solve one instance to optimality.

    The sifted dual simplex handles almost everything in a few narrow
    pivots; if it hits the pivot cap, returns a vertex that fails the
    residual check, or reports infeasibility, the two-phase Bland method
    re-solves the same instance as the authoritative slow path.

    Raises :class:`InfeasibleProblem` when the feasible set is provably
    empty and :class:`PivotLimitExceeded` when both paths run out of pivots.
    """
    cap = max_pivots if max_pivots is not None else _simplex.default_pivot_cap(problem.dim)
    if cap <= 0:
        raise InvalidParameter(f"max_pivots must be positive, got {cap}")
    status, beta, pivots = _simplex.sifted_solve(problem.a, problem.b, problem.lam, cap)
    if status == _simplex.STATUS_OPTIMAL:
        solution = _finish(problem, beta, pivots)
        if solution is not None:
            return solution
    # fall back to the Bland two-phase method; it confirms or overturns the
    # fast-path verdict and carries a termination guarantee
    status2, beta2, pivots2 = _simplex.bland_two_phase_solve(
        problem.a, problem.b, problem.lam, cap
    )
    total = pivots + pivots2
    if status2 == _simplex.STATUS_OPTIMAL:
        solution = _finish(problem, beta2, total)
        if solution is not None:
            return solution
        raise SolverError(
            f"numerical breakdown: optimal vertex violates the residual bound "
            f"(lam={problem.lam!r})"
        )
    if status2 == _simplex.STATUS_INFEASIBLE:
        raise InfeasibleProblem(
            f"no beta satisfies ||a beta - b||_inf <= {problem.lam!r}"
        )
    if status2 == _simplex.STATUS_PIVOT_LIMIT:
        raise PivotLimitExceeded(
            f"simplex exceeded {cap} pivots (d={problem.dim})"
        )
    raise SolverError("phase-2 objective unbounded; input is numerically broken")


def _clime_fallback(sigma, j: int, lam: float, max_pivots: int) -> np.ndarray:
    """Exact ladder for one column the fast kernel could not finish."""
    unit = np.zeros(sigma.shape[0])
    unit[j] = 1.0
    problem = DantzigProblem(sigma, unit, lam)
    try:
        return solve_dantzig(problem, max_pivots=max_pivots).beta
    except SolverError as exc:
        raise type(exc)(f"CLIME column {j}: {exc}") from exc


def _validate_clime_args(sigma, lam, max_pivots):
    sigma = as_matrix(sigma, "sigma")
    check_symmetric(sigma, 1e-10, "sigma")
    lam = float(lam)
    if not np.isfinite(lam) or lam < 0.0:
        raise InvalidParameter(f"lam must be finite and nonnegative, got {lam!r}")
    cap = max_pivots if max_pivots is not None else _simplex.default_pivot_cap(sigma.shape[0])
    if cap <= 0:
        raise InvalidParameter(f"max_pivots must be positive, got {cap}")
    return sigma, lam, cap


def solve_clime_column(sigma, j: int, lam: float,
                       max_pivots: int | None = None) -> np.ndarray:
    """One precision-matrix column: ``min ||theta||_1, ||sigma theta - e_j||_inf <= lam``."""
    sigma, lam, cap = _validate_clime_args(sigma, lam, max_pivots)
    d = sigma.shape[0]
    if not 0 <= j < d:
        raise InvalidParameter(f"column index {j} out of range for d={d}")
    theta = np.zeros((d, 1))
    status = np.full(1, -1, dtype=np.int64)
    _simplex.clime_block(sigma, lam, cap, j, j + 1, theta, status, RESIDUAL_SLACK)
    if status[0] == _simplex.STATUS_OPTIMAL:
        return theta[:, 0].copy()
    return _clime_fallback(sigma, j, lam, cap)


def solve_clime(sigma, lam: float, max_pivots: int | None = None,
                threads: int = 1) -> np.ndarray:
    """Column-wise precision estimate: column ``j`` solves against ``e_j``.

    Columns are assembled into a d x d matrix whose j-th *column* is the
    solution for target ``e_j``.  With ``threads > 1`` contiguous column
    ranges are dispatched to a thread pool; the result does not depend on
    the thread count because every column is an independent program and the
    ranges partition the columns.

    The input is validated once here; the columns then run inside a single
    compiled kernel per range, falling back to the defensive per-column
    ladder only where the kernel reports failure.
    """
    sigma, lam, cap = _validate_clime_args(sigma, lam, max_pivots)
    d = sigma.shape[0]
    theta = np.zeros((d, d))
    status = np.full(d, -1, dtype=np.int64)
    if threads > 1 and d > 1:
        chunks = np.linspace(0, d, min(threads, d) + 1).astype(int)
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_simplex.clime_block, sigma, lam, cap, lo, hi,
                            theta[:, lo:hi], status[lo:hi], RESIDUAL_SLACK)
                for lo, hi in zip(chunks[:-1], chunks[1:]) if lo < hi
            ]
            for fut in futures:
                fut.result()
    else:
        _simplex.clime_block(sigma, lam, cap, 0, d, theta, status, RESIDUAL_SLACK)
    for j in np.flatnonzero(status != _simplex.STATUS_OPTIMAL):
        theta[:, j] = _clime_fallback(sigma, int(j), lam, cap)
    return theta
