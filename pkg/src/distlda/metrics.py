"""Evaluation quantities: estimation-error norms, support-recovery F1,
sign consistency, and plug-in classification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyTestSet, InvalidParameter
from .linalg import as_matrix, as_vector, norms

#: entries at or below this magnitude count as zero for support and sign tests
SUPPORT_TOL = 1e-10

#: CSV column order for one evaluation row
REPORT_COLUMNS = (
    "method", "m", "N", "d", "rep",
    "err_l1", "err_l2", "err_linf",
    "f1", "precision", "recall", "sign_consistent", "misclass_rate",
)


@dataclass(frozen=True)
class EvalReport:
    """One method's evaluation in one experiment cell."""

    method: str
    m: int
    n_total: int
    d: int
    rep: int
    err_l1: float
    err_l2: float
    err_linf: float
    f1: float
    precision: float
    recall: float
    sign_consistent: bool
    misclass_rate: float | None = None

    def csv_row(self) -> list[str]:
        missing = "" if self.misclass_rate is None else repr(float(self.misclass_rate))
        return [
            self.method, str(self.m), str(self.n_total), str(self.d),
            str(self.rep),
            repr(float(self.err_l1)), repr(float(self.err_l2)),
            repr(float(self.err_linf)),
            repr(float(self.f1)), repr(float(self.precision)),
            repr(float(self.recall)),
            "1" if self.sign_consistent else "0",
            missing,
        ]


def error_norms(beta_hat, beta_star) -> tuple[float, float, float]:
    """(l1, l2, linf) norms of beta_hat - beta_star."""
    beta_hat = as_vector(beta_hat, "beta_hat")
    beta_star = as_vector(beta_star, "beta_star")
    if beta_hat.shape != beta_star.shape:
        raise DimensionMismatch(
            f"error_norms: {beta_hat.shape[0]} vs {beta_star.shape[0]}"
        )
    return norms(beta_hat - beta_star)


def f1_support(beta_hat, beta_star,
               tol: float = SUPPORT_TOL) -> tuple[float, float, float]:
    """(f1, precision, recall) of support recovery at tolerance tol.

    Empty estimated support gives precision 0 (hence F1 = 0) unless the true
    support is empty too, in which case recovery is vacuously perfect.
    """
    beta_hat = as_vector(beta_hat, "beta_hat")
    beta_star = as_vector(beta_star, "beta_star")
    if beta_hat.shape != beta_star.shape:
        raise DimensionMismatch(
            f"f1_support: {beta_hat.shape[0]} vs {beta_star.shape[0]}"
        )
    if tol < 0:
        raise InvalidParameter(f"tol must be >= 0, got {tol}")
    est = np.abs(beta_hat) > tol
    true = np.abs(beta_star) > tol
    n_est = int(est.sum())
    n_true = int(true.sum())
    if n_est == 0 and n_true == 0:
        return 1.0, 1.0, 1.0
    if n_est == 0 or n_true == 0:
        return 0.0, 0.0, 0.0
    hits = int((est & true).sum())
    precision = hits / n_est
    recall = hits / n_true
    if precision + recall == 0.0:
        return 0.0, precision, recall
    f1 = 2.0 * precision * recall / (precision + recall)
    return f1, precision, recall


def sign_consistent(beta_hat, beta_star) -> bool:
    """True iff the sign pattern matches everywhere (|x| <= 1e-10 counts as 0)."""
    beta_hat = as_vector(beta_hat, "beta_hat")
    beta_star = as_vector(beta_star, "beta_star")
    if beta_hat.shape != beta_star.shape:
        raise DimensionMismatch(
            f"sign_consistent: {beta_hat.shape[0]} vs {beta_star.shape[0]}"
        )

    def signs(v):
        s = np.sign(v)
        s[np.abs(v) <= SUPPORT_TOL] = 0.0
        return s

    return bool(np.array_equal(signs(beta_hat), signs(beta_star)))


def classify(z, beta, mu_mid) -> int:
    """Class 1 iff (z - mu_mid) . beta > 0; the boundary goes to class 2."""
    z = as_vector(z, "z")
    beta = as_vector(beta, "beta")
    mu_mid = as_vector(mu_mid, "mu_mid")
    if not (z.shape == beta.shape == mu_mid.shape):
        raise DimensionMismatch("classify: z, beta, mu_mid must share dimension")
    return 1 if float((z - mu_mid) @ beta) > 0.0 else 2


def misclassification_rate(test_x, test_y, beta, mu_mid) -> float:
    """Fraction of class-1 rows not sent to 1 plus class-2 rows not sent to 2."""
    test_x = as_matrix(test_x, "test_x")
    test_y = as_matrix(test_y, "test_y")
    beta = as_vector(beta, "beta")
    mu_mid = as_vector(mu_mid, "mu_mid")
    total = test_x.shape[0] + test_y.shape[0]
    if total == 0:
        raise EmptyTestSet("misclassification_rate needs at least one test row")
    if (test_x.size and test_x.shape[1] != beta.shape[0]) or \
       (test_y.size and test_y.shape[1] != beta.shape[0]):
        raise DimensionMismatch("test rows do not match beta dimension")
    scores_x = (test_x - mu_mid) @ beta if test_x.shape[0] else np.zeros(0)
    scores_y = (test_y - mu_mid) @ beta if test_y.shape[0] else np.zeros(0)
    wrong = int((scores_x <= 0.0).sum()) + int((scores_y > 0.0).sum())
    return wrong / total
