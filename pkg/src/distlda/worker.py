"""One machine's pipeline: shard statistics, local sparse LDA, precision
estimate, debiasing, and the single message it sends to the master.

The covariance is the pooled within-class scatter divided by the *total*
shard size n = n1 + n2 (no n-2 correction).  Debiasing applies the
correction beta_hat - theta_hat.T @ (sigma @ beta_hat - mud) exactly in
that order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateShard, DimensionMismatch, DistLdaError
from .linalg import as_matrix, as_vector
from .solver import DantzigProblem, solve_clime, solve_dantzig


@dataclass(frozen=True)
class DataShard:
    """Raw samples held by one machine: class-1 rows in x, class-2 in y."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = as_matrix(self.x, "x")
        y = as_matrix(self.y, "y")
        if x.shape[0] < 2 or y.shape[0] < 2:
            raise DegenerateShard(
                f"need >= 2 rows per class, got n1={x.shape[0]}, n2={y.shape[0]}"
            )
        if x.shape[1] != y.shape[1]:
            raise DimensionMismatch(
                f"class matrices disagree on d: {x.shape[1]} vs {y.shape[1]}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n1(self) -> int:
        return self.x.shape[0]

    @property
    def n2(self) -> int:
        return self.y.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class ShardSummary:
    """Sufficient statistics of one shard."""

    mu1: np.ndarray
    mu2: np.ndarray
    mud: np.ndarray
    sigma: np.ndarray
    n1: int
    n2: int

    @property
    def d(self) -> int:
        return self.mu1.shape[0]


@dataclass(frozen=True)
class WorkerMessage:
    """The one-round payload: debiased estimate plus the two class means."""

    beta_tilde: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    worker_id: int

    def __post_init__(self):
        bt = as_vector(self.beta_tilde, "beta_tilde")
        m1 = as_vector(self.mu1, "mu1")
        m2 = as_vector(self.mu2, "mu2")
        if not (bt.shape == m1.shape == m2.shape):
            raise DimensionMismatch("beta_tilde, mu1, mu2 must share dimension")
        object.__setattr__(self, "beta_tilde", bt)
        object.__setattr__(self, "mu1", m1)
        object.__setattr__(self, "mu2", m2)

    @property
    def d(self) -> int:
        return self.beta_tilde.shape[0]

    def to_json(self) -> str:
        return json.dumps({
            "worker_id": int(self.worker_id),
            "beta_tilde": [float(v) for v in self.beta_tilde],
            "mu1": [float(v) for v in self.mu1],
            "mu2": [float(v) for v in self.mu2],
        })

    @classmethod
    def from_json(cls, text: str) -> "WorkerMessage":
        obj = json.loads(text)
        return cls(
            beta_tilde=np.asarray(obj["beta_tilde"], dtype=np.float64),
            mu1=np.asarray(obj["mu1"], dtype=np.float64),
            mu2=np.asarray(obj["mu2"], dtype=np.float64),
            worker_id=int(obj["worker_id"]),
        )


def summarize_shard(shard: DataShard) -> ShardSummary:
    """Class means and pooled within-class covariance with divisor n1+n2."""
    if shard.n1 < 2 or shard.n2 < 2:
        raise DegenerateShard(
            f"need >= 2 rows per class, got n1={shard.n1}, n2={shard.n2}"
        )
    mu1 = shard.x.mean(axis=0)
    mu2 = shard.y.mean(axis=0)
    xc = shard.x - mu1
    yc = shard.y - mu2
    n = shard.n1 + shard.n2
    sigma = (xc.T @ xc + yc.T @ yc) / n
    sigma = 0.5 * (sigma + sigma.T)  # kill the last round-off asymmetry
    return ShardSummary(mu1=mu1, mu2=mu2, mud=mu1 - mu2, sigma=sigma,
                        n1=shard.n1, n2=shard.n2)


def local_sparse_lda(summary: ShardSummary, lam: float) -> np.ndarray:
    """The local constrained l1 estimate against the shard's mean gap."""
    problem = DantzigProblem(summary.sigma, summary.mud, lam)
    return solve_dantzig(problem).beta


def debias(summary: ShardSummary, beta_hat, theta_hat) -> np.ndarray:
    """beta_hat - theta_hat.T @ (sigma @ beta_hat - mud), in exactly this order."""
    beta_hat = as_vector(beta_hat, "beta_hat")
    theta_hat = as_matrix(theta_hat, "theta_hat")
    d = summary.d
    if beta_hat.shape[0] != d or theta_hat.shape[0] != d:
        raise DimensionMismatch(
            f"debias dims disagree: summary d={d}, beta_hat {beta_hat.shape[0]}, "
            f"theta_hat {theta_hat.shape}"
        )
    residual = summary.sigma @ beta_hat - summary.mud
    return beta_hat - theta_hat.T @ residual


def run_worker(shard: DataShard, lam: float, lam_prime: float,
               worker_id: int, threads: int = 1) -> WorkerMessage:
    """Full worker pass: summarize, local estimate, precision columns, debias.

    Pure function of (shard, lam, lam_prime); thread count only affects how
    the precision columns are scheduled, never the result.
    """
    try:
        summary = summarize_shard(shard)
        beta_hat = local_sparse_lda(summary, lam)
        theta_hat = solve_clime(summary.sigma, lam_prime, threads=threads)
        beta_tilde = debias(summary, beta_hat, theta_hat)
    except DistLdaError as exc:
        raise type(exc)(f"worker {worker_id}: {exc}") from exc
    return WorkerMessage(beta_tilde=beta_tilde, mu1=summary.mu1,
                         mu2=summary.mu2, worker_id=worker_id)
