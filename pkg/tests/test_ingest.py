"""Real-data pipeline tests: schema parsing, preprocessing, splitting,
cross-validated tuning, and the full multi-site protocol."""

import json
import math

import numpy as np
import pytest

from conftest import write_sites
from distlda.errors import (
    AllMissingColumn,
    FoldTooSmall,
    InvalidParameter,
    ParseError,
    SchemaMismatch,
    TooFewRows,
)
from distlda.ingest import (
    ColumnSchema,
    RawTable,
    SiteTable,
    degenerate_columns,
    feature_names,
    fit_method,
    kfold_tune,
    load_csv,
    load_schema,
    load_site,
    make_folds,
    median_threshold,
    preprocess,
    restrict_columns,
    run_real,
    split_train_test,
)
from distlda.metrics import misclassification_rate
from distlda.worker import DataShard

SCHEMA = [
    ColumnSchema(name="age", kind="numeric"),
    ColumnSchema(name="grp", kind="categorical", categories=("A", "B", "C")),
    ColumnSchema(name="y", kind="label", categories=("0", "1"), positive=("1",)),
]


def _toy_sites(seed=41, n_sites=2, rows=40, d=3):
    """SiteTables with continuous features and an exactly balanced label."""
    rng = np.random.default_rng(seed)
    sites = []
    for s in range(n_sites):
        feats = rng.normal(size=(rows, d))
        score = feats[:, 0] - 0.5 * feats[:, 1] + 0.4 * rng.normal(size=rows)
        labels = np.where(score > np.median(score), 1, 2)
        sites.append(SiteTable(site_id=s, features=feats, labels=labels))
    return sites


def test_load_schema_round_trip(tmp_path):
    path = tmp_path / "schema.json"
    path.write_text(json.dumps([
        {"name": "age", "kind": "numeric"},
        {"name": "grp", "kind": "categorical", "categories": ["A", "B"]},
        {"name": "y", "kind": "label", "categories": ["0", "1"], "positive": ["1"]},
    ]))
    cols = load_schema(path)
    assert [c.name for c in cols] == ["age", "grp", "y"]
    assert cols[1].categories == ("A", "B")
    assert cols[2].positive == ("1",)


def test_load_schema_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        load_schema(bad)
    bad.write_text(json.dumps([{"name": "a", "kind": "numeric"}]))
    with pytest.raises(ParseError):  # no label column
        load_schema(bad)
    bad.write_text(json.dumps([
        {"name": "a", "kind": "numeric"},
        {"name": "a", "kind": "label", "categories": ["0", "1"], "positive": ["1"]},
    ]))
    with pytest.raises(ParseError):  # duplicate names
        load_schema(bad)


def test_load_csv_missing_and_level_matching(tmp_path):
    path = tmp_path / "site.csv"
    path.write_text("age,grp,y\n1,A,0\n?,B,1.0\n3,C,1\n")
    raw = load_csv(path, SCHEMA)
    assert raw.n_rows == 3
    assert raw.columns["age"] == [1.0, None, 3.0]
    # "1.0" matches the declared label level "1" by float value
    assert raw.columns["y"] == ["0", "1", "1"]


def test_load_csv_rejects_bad_rows(tmp_path):
    path = tmp_path / "site.csv"
    path.write_text("age,grp\n")
    with pytest.raises(SchemaMismatch):  # header does not match the schema
        load_csv(path, SCHEMA)
    path.write_text("age,grp,y\n1,D,0\n")
    with pytest.raises(ParseError):  # undeclared categorical level
        load_csv(path, SCHEMA)
    path.write_text("age,grp,y\n1,A\n")
    with pytest.raises(ParseError):  # short row
        load_csv(path, SCHEMA)
    path.write_text("")
    with pytest.raises(SchemaMismatch):  # empty file
        load_csv(path, SCHEMA)


def test_header_only_file_yields_zero_rows(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("age,grp,y\n")
    raw = load_csv(path, SCHEMA)
    assert raw.n_rows == 0
    with pytest.raises(InvalidParameter):
        preprocess(raw, SCHEMA)


def test_preprocess_imputes_and_dummy_codes():
    raw = RawTable(columns={
        "age": [1.0, None, 3.0],
        "grp": ["A", "B", "C"],
        "y": ["0", "1", "1"],
    }, n_rows=3)
    feats, labels = preprocess(raw, SCHEMA)
    assert np.array_equal(feats[:, 0], [1.0, 2.0, 3.0])  # mean-imputed
    assert np.array_equal(feats[:, 1], [0.0, 1.0, 0.0])  # grp == B
    assert np.array_equal(feats[:, 2], [0.0, 0.0, 1.0])  # grp == C
    assert np.array_equal(labels, [2, 1, 1])  # positive level -> class 1
    assert not np.isnan(feats).any()


def test_preprocess_width_matches_schema():
    """p = one column per numeric plus k-1 indicators per categorical."""
    rng = np.random.default_rng(44)
    n = 12
    schema = [
        ColumnSchema(name="n0", kind="numeric"),
        ColumnSchema(name="c0", kind="categorical", categories=("a", "b", "c", "d")),
        ColumnSchema(name="n1", kind="numeric"),
        ColumnSchema(name="c1", kind="categorical", categories=("x", "y")),
        ColumnSchema(name="y", kind="label", categories=("0", "1"), positive=("1",)),
    ]
    raw = RawTable(columns={
        "n0": list(rng.normal(size=n)),
        "c0": list(rng.choice(["a", "b", "c", "d"], size=n)),
        "n1": list(rng.normal(size=n)),
        "c1": list(rng.choice(["x", "y"], size=n)),
        "y": list(rng.choice(["0", "1"], size=n)),
    }, n_rows=n)
    feats, labels = preprocess(raw, schema)
    assert feats.shape == (n, 2 + 3 + 1)
    assert not np.isnan(feats).any()
    assert set(labels) <= {1, 2}
    assert feature_names(schema) == [
        "n0", "c0=b", "c0=c", "c0=d", "n1", "c1=y"]


def test_preprocess_all_missing_column():
    raw = RawTable(columns={
        "age": [None, None],
        "grp": ["A", "B"],
        "y": ["0", "1"],
    }, n_rows=2)
    with pytest.raises(AllMissingColumn):
        preprocess(raw, SCHEMA)


def test_split_is_deterministic_partition():
    site = _toy_sites(rows=20)[0]  # 10 rows per class
    train, (t1, t2) = split_train_test(site, 0.5, seed=9)
    again, (u1, u2) = split_train_test(site, 0.5, seed=9)
    assert np.array_equal(train.x, again.x) and np.array_equal(train.y, again.y)
    assert np.array_equal(t1, u1) and np.array_equal(t2, u2)
    assert train.x.shape[0] == 5 and train.y.shape[0] == 5
    assert t1.shape[0] == 5 and t2.shape[0] == 5
    # each class partitions exactly into train + test
    for cls, part1, part2 in ((1, train.x, t1), (2, train.y, t2)):
        original = site.features[site.labels == cls]
        stacked = np.vstack([part1, part2])
        assert sorted(map(tuple, stacked)) == sorted(map(tuple, original))
    different = split_train_test(site, 0.5, seed=10)[0]
    assert not np.array_equal(train.x, different.x)


def test_split_needs_four_rows_per_class():
    feats = np.random.default_rng(0).normal(size=(9, 2))
    labels = np.array([1, 1, 1, 2, 2, 2, 2, 2, 2])
    with pytest.raises(TooFewRows):
        split_train_test(SiteTable(site_id=0, features=feats, labels=labels),
                         0.5, seed=0)


def test_degenerate_columns_and_restriction():
    rng = np.random.default_rng(45)
    x = rng.normal(size=(6, 4))
    y = rng.normal(size=(6, 4))
    x[:, 2] = 1.0
    y[:, 2] = 1.0  # constant in both classes
    shards = [DataShard(x=x, y=y),
              DataShard(x=rng.normal(size=(5, 4)), y=rng.normal(size=(5, 4)))]
    assert np.array_equal(degenerate_columns(shards), [2])
    kept = restrict_columns(shards, np.array([0, 1, 3]))
    assert kept[0].x.shape == (6, 3)
    assert np.array_equal(kept[0].x[:, 2], x[:, 3])


def test_median_threshold_hand_case():
    beta_avg = np.array([0.5, -1.0, 0.0, 2.0])
    got = median_threshold(beta_avg, 1.0, 100)
    assert got == pytest.approx(math.sqrt(math.log(4) / 100), abs=1e-15)
    assert median_threshold(np.zeros(4), 1.0, 100) == 0.0


def test_make_folds_partitions_each_class():
    sites = _toy_sites(rows=30)
    shards = [split_train_test(s, 0.5, seed=1)[0] for s in sites]
    folds = make_folds(shards, k=3, seed=2)
    assert len(folds) == 3
    total_holdout = 0
    for fold_shards, ho_x, ho_y in folds:
        assert len(fold_shards) == len(shards)
        for kept, full in zip(fold_shards, shards):
            assert kept.x.shape[0] < full.x.shape[0]
        total_holdout += ho_x.shape[0] + ho_y.shape[0]
    assert total_holdout == sum(s.x.shape[0] + s.y.shape[0] for s in shards)
    with pytest.raises(InvalidParameter):
        make_folds(shards, k=1, seed=0)
    tiny = [DataShard(x=np.zeros((2, 2)), y=np.zeros((6, 2)))]
    with pytest.raises(FoldTooSmall):
        make_folds(tiny, k=5, seed=0)


def test_fit_method_shapes_and_unknown_method():
    shards = [split_train_test(s, 0.5, seed=3)[0] for s in _toy_sites()]
    for method in ("distributed", "naive", "centralized"):
        beta, mu_mid = fit_method(method, shards, 0.8, t_c=0.5)
        assert beta.shape == (3,) and mu_mid.shape == (3,)
    with pytest.raises(InvalidParameter):
        fit_method("bagging", shards, 0.8)


def test_kfold_tune_deterministic():
    shards = [split_train_test(s, 0.5, seed=4)[0] for s in _toy_sites()]
    kwargs = dict(c_grid=(0.6, 1.2), t_grid=(0.0, 0.8), k=3, seed=13)
    first = kfold_tune(shards, **kwargs)
    again = kfold_tune(shards, **kwargs)
    assert (first.lambda_c, first.t_c, first.cv_misclass) == \
        (again.lambda_c, again.t_c, again.cv_misclass)


def test_kfold_tune_singleton_grids_and_baseline_t():
    shards = [split_train_test(s, 0.5, seed=5)[0] for s in _toy_sites()]
    got = kfold_tune(shards, c_grid=(0.9,), t_grid=(0.3,), k=3, seed=1)
    assert (got.lambda_c, got.t_c) == (0.9, 0.3)
    # baselines ignore the threshold grid entirely
    cent = kfold_tune(shards, c_grid=(0.9, 1.3), t_grid=(0.3, 0.7), k=3,
                      seed=1, method="centralized")
    assert cent.t_c == 0.3


def test_kfold_tune_tie_breaks_to_first_grid_point():
    shards = [split_train_test(s, 0.5, seed=6)[0] for s in _toy_sites()]
    # a duplicated C scores identically; the first index must win
    got = kfold_tune(shards, c_grid=(1.1, 1.1), t_grid=(0.5,), k=3, seed=2)
    assert got.lambda_c == 1.1
    # two huge thresholds both zero the estimate -> tie -> first t wins
    tied = kfold_tune(shards, c_grid=(1.1,), t_grid=(50.0, 90.0), k=3, seed=2)
    assert tied.t_c == 50.0


def test_kfold_tune_matches_exhaustive_re_evaluation():
    """Re-score every grid point through the public fit/evaluate path and
    check the tuner picked exactly the argmin (C-major tie order)."""
    shards = [split_train_test(s, 0.5, seed=7)[0] for s in _toy_sites(rows=36)]
    c_grid, t_grid, k, seed = (0.6, 1.4), (0.0, 1.0), 3, 13
    got = kfold_tune(shards, c_grid=c_grid, t_grid=t_grid, k=k, seed=seed)

    folds = make_folds(shards, k, seed)
    scores = np.zeros((len(c_grid), len(t_grid)))
    for fold_shards, ho_x, ho_y in folds:
        drop = degenerate_columns(fold_shards)
        keep = np.setdiff1d(np.arange(shards[0].d), drop)
        fitted = restrict_columns(fold_shards, keep) if drop.size else fold_shards
        for ci, c in enumerate(c_grid):
            for ti, t_c in enumerate(t_grid):
                beta, mu_mid = fit_method("distributed", fitted, c, t_c)
                scores[ci, ti] += misclassification_rate(
                    ho_x[:, keep], ho_y[:, keep], beta, mu_mid)
    scores /= len(folds)
    ci, ti = np.unravel_index(np.argmin(scores), scores.shape)
    assert (got.lambda_c, got.t_c) == (c_grid[ci], t_grid[ti])
    assert got.cv_misclass == pytest.approx(scores[ci, ti], abs=1e-12)


def test_run_real_deterministic_rows():
    sites = _toy_sites(rows=36)
    kwargs = dict(reps=2, seed=8, k=3, fraction=0.5,
                  c_grid=(0.7, 1.3), t_grid=(0.0, 0.8))
    rates1, rows1 = run_real(sites, **kwargs)
    rates2, rows2 = run_real(sites, **kwargs)
    assert rows1 == rows2
    assert rates1 == rates2
    assert [r[0] for r in rows1] == ["distributed", "naive", "centralized"]
    for _, mean, std in rows1:
        assert 0.0 <= mean <= 1.0 and std >= 0.0
    _, single = run_real(sites, reps=1, seed=8, k=3,
                         c_grid=(0.7,), t_grid=(0.0,))
    assert all(std == 0.0 for _, _, std in single)


def test_load_site_end_to_end(tmp_path):
    schema_path, csv_paths = write_sites(tmp_path, n_sites=1, rows=24,
                                         missing_every=9)
    schema = load_schema(schema_path)
    site = load_site(csv_paths[0], schema, site_id=0)
    assert site.features.shape == (24, 4)  # f0, f1, grp=b, grp=c
    assert not np.isnan(site.features).any()
    assert set(site.labels) == {1, 2}
