"""Metric tests: error norms, support F1, sign pattern, classification."""

import numpy as np
import pytest

from distlda.errors import DimensionMismatch, EmptyTestSet
from distlda.metrics import (
    REPORT_COLUMNS,
    EvalReport,
    classify,
    error_norms,
    f1_support,
    misclassification_rate,
    sign_consistent,
)


def test_error_norms_hand_case():
    assert error_norms([4.0, -3.0], [1.0, 1.0]) == (7.0, 5.0, 4.0)
    with pytest.raises(DimensionMismatch):
        error_norms([1.0], [1.0, 2.0])


def test_error_norms_ordering():
    rng = np.random.default_rng(30)
    for _ in range(40):
        d = int(rng.integers(1, 25))
        l1, l2, linf = error_norms(rng.standard_normal(d), rng.standard_normal(d))
        assert linf <= l2 + 1e-12 <= l1 + 1e-12


def test_f1_half_overlap_hand_case():
    # supports {0, 1} vs {1, 2}: one hit out of two on each side
    f1, prec, rec = f1_support([1.0, 1.0, 0.0, 0.0], [0.0, 1.0, 1.0, 0.0])
    assert (f1, prec, rec) == (0.5, 0.5, 0.5)


def test_f1_empty_support_conventions():
    assert f1_support([0.0, 0.0], [0.0, 0.0]) == (1.0, 1.0, 1.0)
    assert f1_support([0.0, 0.0], [1.0, 0.0]) == (0.0, 0.0, 0.0)
    assert f1_support([1.0, 0.0], [0.0, 0.0]) == (0.0, 0.0, 0.0)


def test_f1_range_and_equality_condition():
    """F1 is always in [0, 1] and hits 1 exactly on identical supports."""
    rng = np.random.default_rng(31)
    for _ in range(40):
        d = int(rng.integers(2, 20))
        hat = rng.standard_normal(d) * (rng.random(d) < 0.5)
        star = rng.standard_normal(d) * (rng.random(d) < 0.5)
        f1, prec, rec = f1_support(hat, star)
        assert 0.0 <= f1 <= 1.0 and 0.0 <= prec <= 1.0 and 0.0 <= rec <= 1.0
        same = np.array_equal(np.abs(hat) > 1e-10, np.abs(star) > 1e-10)
        assert (f1 == 1.0) == same


def test_sign_consistency():
    assert sign_consistent([1.0, -2.0, 0.0], [3.0, -0.5, 0.0])
    assert not sign_consistent([1.0, -2.0, 0.0], [3.0, 0.5, 0.0])
    assert not sign_consistent([1.0, 0.0], [1.0, 1e-6])
    assert sign_consistent([1.0, 1e-12], [1.0, 0.0])  # below tolerance


def test_classify_boundary_and_hand_cases():
    # the boundary goes to class 2, as does any negative score
    assert classify([1.0, 2.0], [0.5, -1.0], [1.0, 2.0]) == 2
    assert classify([3.0], [-1.0], [0.0]) == 2
    assert classify([3.0], [1.0], [0.0]) == 1


def test_classify_invariant_under_positive_scaling():
    rng = np.random.default_rng(32)
    for _ in range(40):
        d = int(rng.integers(1, 12))
        z, beta, mu = (rng.standard_normal(d) for _ in range(3))
        base = classify(z, beta, mu)
        for c in (0.1, 2.0, 317.0):
            assert classify(z, c * beta, mu) == base


def test_zero_beta_sends_everything_to_class_two():
    rng = np.random.default_rng(33)
    tx = rng.standard_normal((7, 3))
    ty = rng.standard_normal((5, 3))
    rate = misclassification_rate(tx, ty, np.zeros(3), np.zeros(3))
    assert rate == pytest.approx(7 / 12)


def test_sign_flip_complements_rate():
    rng = np.random.default_rng(34)
    beta = rng.standard_normal(4)
    mu = rng.standard_normal(4)
    tx = rng.standard_normal((20, 4))
    ty = rng.standard_normal((15, 4))
    # continuous draws: no test point sits exactly on the boundary
    assert np.all(((tx - mu) @ beta) != 0.0) and np.all(((ty - mu) @ beta) != 0.0)
    rate = misclassification_rate(tx, ty, beta, mu)
    flipped = misclassification_rate(tx, ty, -beta, mu)
    assert flipped == pytest.approx(1.0 - rate, abs=1e-15)


def test_misclassification_validation():
    with pytest.raises(EmptyTestSet):
        misclassification_rate(np.zeros((0, 2)), np.zeros((0, 2)),
                               np.zeros(2), np.zeros(2))
    with pytest.raises(DimensionMismatch):
        misclassification_rate(np.zeros((2, 3)), np.zeros((2, 2)),
                               np.zeros(2), np.zeros(2))


def test_eval_report_row_matches_columns():
    rep = EvalReport(method="distributed", m=4, n_total=800, d=20, rep=1,
                     err_l1=1.0, err_l2=0.5, err_linf=0.25, f1=0.9,
                     precision=1.0, recall=0.8, sign_consistent=True)
    row = rep.csv_row()
    assert len(row) == len(REPORT_COLUMNS)
    assert row[0] == "distributed"
    assert row[-1] == ""  # no misclassification recorded
