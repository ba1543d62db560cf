"""Dense linear-algebra primitives used by the estimators.

Everything operates on float64 numpy arrays.  The validators
:func:`as_vector` / :func:`as_matrix` are the single entry point through
which outside data (CSV files, CLI arguments, test fixtures) becomes an
array the rest of the package will touch: they enforce dtype, shape and
finiteness once so the numerical kernels can assume clean inputs.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch, InvalidParameter, NotPositiveDefinite

__all__ = [
    "as_vector",
    "as_matrix",
    "check_symmetric",
    "cholesky",
    "solve_cholesky",
    "mat_vec",
    "norms",
    "norm_l1",
    "norm_l2",
    "norm_inf",
]

#: Relative pivot tolerance below which a Cholesky pivot is treated as zero.
CHOLESKY_PIVOT_RTOL = 1e-12


def as_vector(values, name: str = "vector") -> np.ndarray:
    """Return ``values`` as a finite, contiguous float64 1-d array."""
    v = np.ascontiguousarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name}: expected 1-d array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidParameter(f"{name}: entries must be finite")
    return v


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Return ``values`` as a finite, row-major float64 2-d array."""
    a = np.ascontiguousarray(values, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name}: expected 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidParameter(f"{name}: entries must be finite")
    return a


def check_symmetric(a: np.ndarray, rtol: float = 1e-10, name: str = "matrix") -> None:
    """Raise :class:`InvalidParameter` unless ``a`` is square and symmetric.

    Symmetry is relative: the largest entry of ``|a - a.T|`` must not exceed
    ``rtol`` times the largest entry of ``|a|`` (or ``rtol`` itself for the
    zero matrix).
    """
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name}: expected a square matrix, got shape {a.shape}")
    if a.size == 0:
        return
    scale = float(np.max(np.abs(a)))
    gap = float(np.max(np.abs(a - a.T)))
    if gap > rtol * scale:
        raise InvalidParameter(
            f"{name}: not symmetric (max |a - a.T| = {gap:.3e}, scale {scale:.3e})"
        )


def cholesky(a) -> np.ndarray:
    """Lower-triangular Cholesky factor ``L`` with ``L @ L.T == a``.

    Uses the outer-product (Cholesky-Crout) form with vectorised column
    updates.  A pivot that is not strictly positive relative to the largest
    diagonal entry (factor ``1e-12``) raises :class:`NotPositiveDefinite`;
    this covers both indefinite and numerically singular inputs.
    """
    a = as_matrix(a, "cholesky input")
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"cholesky: matrix must be square, got {a.shape}")
    d = a.shape[0]
    if d == 0:
        return np.zeros((0, 0))
    max_diag = float(np.max(np.diag(a)))
    tol = CHOLESKY_PIVOT_RTOL * max(max_diag, 0.0)
    lower = np.zeros_like(a)
    for j in range(d):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot <= tol:
            raise NotPositiveDefinite(
                f"cholesky: pivot {pivot:.6e} at index {j} is below tolerance {tol:.6e}"
            )
        root = math.sqrt(pivot)
        lower[j, j] = root
        if j + 1 < d:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / root
    return lower


def solve_cholesky(lower: np.ndarray, rhs) -> np.ndarray:
    """Solve ``(L @ L.T) x = rhs`` given the lower Cholesky factor ``L``.

    Plain forward then backward substitution; ``rhs`` may be a vector.
    """
    lower = as_matrix(lower, "cholesky factor")
    b = as_vector(rhs, "right-hand side")
    d = lower.shape[0]
    if lower.shape[1] != d or b.shape[0] != d:
        raise DimensionMismatch(
            f"solve_cholesky: factor {lower.shape} incompatible with rhs {b.shape}"
        )
    y = np.zeros(d)
    for i in range(d):
        y[i] = (b[i] - lower[i, :i] @ y[:i]) / lower[i, i]
    x = np.zeros(d)
    for i in range(d - 1, -1, -1):
        x[i] = (y[i] - lower[i + 1 :, i] @ x[i + 1 :]) / lower[i, i]
    return x


def mat_vec(a, x) -> np.ndarray:
    """Matrix-vector product ``a @ x`` with explicit shape checking."""
    a = as_matrix(a, "mat_vec matrix")
    x = as_vector(x, "mat_vec vector")
    if a.shape[1] != x.shape[0]:
        raise DimensionMismatch(
            f"mat_vec: matrix has {a.shape[1]} columns but vector has {x.shape[0]} entries"
        )
    return a @ x


def norm_l1(x) -> float:
    return float(np.sum(np.abs(as_vector(x))))


def norm_l2(x) -> float:
    return float(np.linalg.norm(as_vector(x)))


def norm_inf(x) -> float:
    v = as_vector(x)
    return float(np.max(np.abs(v))) if v.size else 0.0


def norms(x) -> tuple[float, float, float]:
    """Return ``(l1, l2, linf)`` norms of a vector in one pass."""
    v = as_vector(x)
    if v.size == 0:
        return 0.0, 0.0, 0.0
    av = np.abs(v)
    return float(av.sum()), float(np.linalg.norm(v)), float(av.max())
