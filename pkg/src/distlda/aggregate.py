"""Master-side aggregation and the two baselines.

The final estimator is the hard-thresholded average of the workers'
debiased vectors.  Averaging sums in ascending worker_id order no matter
how the messages arrive, so the reduction is bit-identical under any
scheduling and permutation invariance is literally testable.  The naive
baseline averages the biased local estimates without thresholding; the
centralized baseline pools every shard into one and runs the local
estimator on the union.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyMessageSet, InvalidParameter
from .linalg import as_vector
from .worker import DataShard, WorkerMessage, local_sparse_lda, summarize_shard


@dataclass(frozen=True)
class AggregateEstimate:
    """Master output: pre- and post-threshold averages plus the midpoint mean."""

    beta_bar: np.ndarray
    beta_avg: np.ndarray
    threshold: float
    mu_mid: np.ndarray
    m: int

    @property
    def d(self) -> int:
        return self.beta_bar.shape[0]

    def to_json(self) -> str:
        return json.dumps({
            "m": int(self.m),
            "threshold": float(self.threshold),
            "beta_bar": [float(v) for v in self.beta_bar],
            "beta_avg": [float(v) for v in self.beta_avg],
            "mu_mid": [float(v) for v in self.mu_mid],
        })


def hard_threshold(v, t: float) -> np.ndarray:
    """Zero every coordinate with |v_j| <= t; boundary values are zeroed."""
    v = as_vector(v, "v")
    if not np.isfinite(t) or t < 0:
        raise InvalidParameter(f"threshold must be finite and >= 0, got {t!r}")
    out = v.copy()
    out[np.abs(v) <= t] = 0.0
    return out


def aggregate(messages, t: float) -> AggregateEstimate:
    """Average the debiased estimates in ascending worker_id order, then
    hard-threshold at t; the midpoint mean comes from the averaged class
    means."""
    messages = list(messages)
    if not messages:
        raise EmptyMessageSet("aggregate needs at least one worker message")
    for msg in messages:
        if not isinstance(msg, WorkerMessage):
            raise InvalidParameter(
                f"aggregate expects WorkerMessage items, got {type(msg).__name__}"
            )
    d = messages[0].d
    if any(msg.d != d for msg in messages):
        raise DimensionMismatch("worker messages disagree on dimension")
    ordered = sorted(messages, key=lambda msg: msg.worker_id)
    beta_sum = np.zeros(d)
    mu1_sum = np.zeros(d)
    mu2_sum = np.zeros(d)
    for msg in ordered:
        beta_sum += msg.beta_tilde
        mu1_sum += msg.mu1
        mu2_sum += msg.mu2
    m = len(ordered)
    beta_avg = beta_sum / m
    mu_mid = (mu1_sum / m + mu2_sum / m) / 2.0
    return AggregateEstimate(
        beta_bar=hard_threshold(beta_avg, t),
        beta_avg=beta_avg,
        threshold=float(t),
        mu_mid=mu_mid,
        m=m,
    )


def naive_average(local_betas) -> np.ndarray:
    """Plain mean of the biased local estimates; no debiasing, no threshold."""
    betas = [as_vector(b, f"local_betas[{i}]") for i, b in enumerate(local_betas)]
    if not betas:
        raise EmptyMessageSet("naive_average needs at least one estimate")
    d = betas[0].shape[0]
    if any(b.shape[0] != d for b in betas):
        raise DimensionMismatch("local estimates disagree on dimension")
    total = np.zeros(d)
    for b in betas:
        total += b
    return total / len(betas)


def pool_shards(shards) -> DataShard:
    """Union of shards: all class-1 rows stacked, then all class-2 rows."""
    shards = list(shards)
    if not shards:
        raise EmptyMessageSet("need at least one shard")
    d = shards[0].d
    if any(s.d != d for s in shards):
        raise DimensionMismatch("shards disagree on dimension")
    return DataShard(
        x=np.vstack([s.x for s in shards]),
        y=np.vstack([s.y for s in shards]),
    )


def centralized(shards, lam: float) -> np.ndarray:
    """Run the local estimator on the union of all shards."""
    pooled = pool_shards(shards)
    return local_sparse_lda(summarize_shard(pooled), lam)
