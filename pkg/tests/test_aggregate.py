"""Master-side tests: hard thresholding, averaging, and the baselines."""

import numpy as np
import pytest

from distlda.aggregate import (
    aggregate,
    centralized,
    hard_threshold,
    naive_average,
    pool_shards,
)
from distlda.errors import DimensionMismatch, EmptyMessageSet, InvalidParameter
from distlda.worker import DataShard, WorkerMessage, local_sparse_lda, summarize_shard


def _msg(rng, d, worker_id):
    return WorkerMessage(beta_tilde=rng.standard_normal(d),
                         mu1=rng.standard_normal(d),
                         mu2=rng.standard_normal(d),
                         worker_id=worker_id)


def test_hard_threshold_hand_case():
    got = hard_threshold([1.2, -0.3, 0.5], 0.5)
    assert np.array_equal(got, [1.2, 0.0, 0.0])  # the boundary 0.5 is zeroed


def test_hard_threshold_rejects_bad_t():
    with pytest.raises(InvalidParameter):
        hard_threshold([1.0], -0.1)
    with pytest.raises(InvalidParameter):
        hard_threshold([1.0], float("nan"))


def test_beta_bar_support_is_exactly_above_threshold():
    rng = np.random.default_rng(20)
    for _ in range(30):
        d = int(rng.integers(1, 30))
        v = rng.standard_normal(d)
        t = float(rng.uniform(0.0, 1.2))
        v[rng.integers(0, d)] = t  # plant an exact boundary hit
        est = aggregate([WorkerMessage(beta_tilde=v, mu1=np.zeros(d),
                                       mu2=np.zeros(d), worker_id=0)], t)
        assert np.array_equal(np.flatnonzero(est.beta_bar),
                              np.flatnonzero(np.abs(v) > t))


def test_aggregate_hand_case():
    msgs = [
        WorkerMessage(beta_tilde=[1.0, 0.0], mu1=[0.0, 0.0], mu2=[0.0, 0.0],
                      worker_id=0),
        WorkerMessage(beta_tilde=[0.0, 1.0], mu1=[0.0, 0.0], mu2=[0.0, 0.0],
                      worker_id=1),
    ]
    est = aggregate(msgs, 0.6)
    assert np.array_equal(est.beta_avg, [0.5, 0.5])
    assert np.array_equal(est.beta_bar, [0.0, 0.0])
    assert est.m == 2 and est.threshold == 0.6


def test_aggregate_permutation_invariant():
    rng = np.random.default_rng(21)
    msgs = [_msg(rng, 6, w) for w in range(5)]
    base = aggregate(msgs, 0.3)
    for perm_seed in range(4):
        shuffled = list(np.random.default_rng(perm_seed).permutation(msgs))
        est = aggregate(shuffled, 0.3)
        assert np.array_equal(est.beta_bar, base.beta_bar)
        assert np.array_equal(est.beta_avg, base.beta_avg)
        assert np.array_equal(est.mu_mid, base.mu_mid)


def test_sparsity_non_increasing_in_t():
    rng = np.random.default_rng(22)
    for _ in range(10):
        d = int(rng.integers(2, 40))
        msgs = [_msg(rng, d, w) for w in range(3)]
        counts = [int(np.count_nonzero(aggregate(msgs, t).beta_bar))
                  for t in np.sort(rng.uniform(0.0, 2.0, size=6))]
        assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_single_message_zero_threshold_is_identity():
    rng = np.random.default_rng(23)
    msg = _msg(rng, 9, 0)
    est = aggregate([msg], 0.0)
    assert np.array_equal(est.beta_bar, msg.beta_tilde)
    assert np.array_equal(est.mu_mid, 0.5 * (msg.mu1 + msg.mu2))


def test_aggregate_input_validation():
    with pytest.raises(EmptyMessageSet):
        aggregate([], 0.0)
    rng = np.random.default_rng(24)
    with pytest.raises(DimensionMismatch):
        aggregate([_msg(rng, 3, 0), _msg(rng, 4, 1)], 0.0)
    with pytest.raises(InvalidParameter):
        aggregate([object()], 0.0)


def test_naive_average_is_plain_mean():
    assert np.array_equal(naive_average([[1.0, 0.0], [0.0, 1.0]]), [0.5, 0.5])
    with pytest.raises(EmptyMessageSet):
        naive_average([])


def test_pool_shards_stacks_in_order():
    a = DataShard(x=np.full((2, 1), 1.0), y=np.full((2, 1), -1.0))
    b = DataShard(x=np.full((3, 1), 2.0), y=np.full((2, 1), -2.0))
    pooled = pool_shards([a, b])
    assert np.array_equal(pooled.x[:, 0], [1.0, 1.0, 2.0, 2.0, 2.0])
    assert np.array_equal(pooled.y[:, 0], [-1.0, -1.0, -2.0, -2.0])


def test_centralized_single_shard_equals_local():
    rng = np.random.default_rng(25)
    shard = DataShard(x=rng.standard_normal((12, 4)) + 0.8,
                      y=rng.standard_normal((10, 4)))
    lam = 0.3
    assert np.array_equal(centralized([shard], lam),
                          local_sparse_lda(summarize_shard(shard), lam))


def test_centralized_on_duplicated_shards_matches_single():
    # duplicating rows leaves the means and the n-divided covariance unchanged
    # (up to summation order: 18 rows sum in a different tree than 9 rows)
    rng = np.random.default_rng(26)
    shard = DataShard(x=rng.standard_normal((9, 3)) + 1.0,
                      y=rng.standard_normal((11, 3)))
    single = summarize_shard(shard)
    doubled = summarize_shard(pool_shards([shard, shard]))
    assert (doubled.n1, doubled.n2) == (2 * single.n1, 2 * single.n2)
    assert np.allclose(doubled.mu1, single.mu1, rtol=0, atol=1e-12)
    assert np.allclose(doubled.mu2, single.mu2, rtol=0, atol=1e-12)
    assert np.allclose(doubled.sigma, single.sigma, rtol=0, atol=1e-12)
    lam = 0.25
    assert np.allclose(centralized([shard, shard], lam),
                       centralized([shard], lam), rtol=0, atol=1e-8)
