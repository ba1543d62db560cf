"""Real-data pipeline: schema-driven CSV loading, dummy coding, imputation,
per-site splits, and cross-validated tuning of the two constants.

Each data file is one site (machine). Categorical attributes expand into
k-1 indicator columns against the first declared level; missing numeric
cells take the column mean of the same table. The tuner runs the full
distributed pipeline on within-site folds so every fold keeps all sites.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .aggregate import aggregate, hard_threshold, naive_average, pool_shards
from .errors import (
    AllMissingColumn,
    FoldTooSmall,
    InvalidParameter,
    ParseError,
    SchemaMismatch,
    TooFewRows,
)
from .metrics import SUPPORT_TOL, misclassification_rate
from .solver import DantzigProblem, solve_clime, solve_dantzig
from .worker import DataShard, WorkerMessage, debias, local_sparse_lda, summarize_shard

KINDS = ("numeric", "categorical", "label")

# Default tuning grids; spans chosen to bracket the constants that theory
# suggests are O(1).
C_GRID = tuple(round(0.1 * i, 1) for i in range(1, 21))
T_GRID = tuple(round(0.1 * i, 1) for i in range(0, 21))

# A feature whose within-class variance vanishes at some site gives that
# site a zero row in its covariance estimate and an unsolvable precision
# column; such columns are dropped for the affected fit.
DEGENERATE_VAR_TOL = 1e-12


@dataclass(frozen=True)
class ColumnSchema:
    """Declared type of one raw CSV column."""

    name: str
    kind: str
    categories: tuple = ()
    missing_token: str = "?"
    positive: tuple = ()  # label levels mapped to class 1; rest map to class 2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameter(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "categorical" and len(self.categories) < 2:
            raise InvalidParameter(
                f"column {self.name!r}: categorical needs >= 2 declared levels")
        if self.kind == "label":
            if len(self.categories) < 2:
                raise InvalidParameter(
                    f"column {self.name!r}: label needs >= 2 declared levels")
            if not self.positive:
                raise InvalidParameter(
                    f"column {self.name!r}: label needs a nonempty 'positive' list")
            extra = set(self.positive) - set(self.categories)
            if extra:
                raise InvalidParameter(
                    f"column {self.name!r}: positive levels {sorted(extra)} "
                    "not among declared categories")


@dataclass(frozen=True)
class RawTable:
    """Typed columns straight from one CSV file; missing cells are None."""

    columns: dict
    n_rows: int


@dataclass(frozen=True)
class SiteTable:
    """One site's preprocessed design matrix and class labels."""

    site_id: int
    features: np.ndarray
    labels: np.ndarray  # values in {1, 2}


@dataclass(frozen=True)
class TuningResult:
    lambda_c: float
    t_c: float
    cv_misclass: float


def load_schema(path) -> list:
    """Read a JSON schema file into ColumnSchema entries, validated."""
    with open(path) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(spec, list) or not spec:
        raise ParseError(f"{path}: expected a nonempty JSON array of columns")
    cols = []
    for i, entry in enumerate(spec):
        if not isinstance(entry, dict) or "name" not in entry or "kind" not in entry:
            raise ParseError(f"{path}: entry {i} needs 'name' and 'kind'")
        cols.append(ColumnSchema(
            name=str(entry["name"]),
            kind=str(entry["kind"]),
            categories=tuple(str(c) for c in entry.get("categories", ())),
            missing_token=str(entry.get("missing_token", "?")),
            positive=tuple(str(c) for c in entry.get("positive", ())),
        ))
    names = [c.name for c in cols]
    if len(set(names)) != len(names):
        raise ParseError(f"{path}: duplicate column names")
    n_label = sum(c.kind == "label" for c in cols)
    if n_label != 1:
        raise ParseError(f"{path}: need exactly one label column, found {n_label}")
    return cols


def _match_level(cell: str, levels) -> str:
    """Match a raw cell against declared levels; returns the level or None.

    Exact string match first; numeric-looking cells also match a level with
    the same float value, so "1.0" and "1" name the same category across
    differently formatted site files.
    """
    if cell in levels:
        return cell
    try:
        val = float(cell)
    except ValueError:
        return None
    for lv in levels:
        try:
            if float(lv) == val:
                return lv
        except ValueError:
            continue
    return None


def load_csv(path, schema) -> RawTable:
    """Parse one site file against the schema.

    Numeric cells equal to the column's missing token come back as None;
    categorical and label cells must match a declared level.
    """
    names = [c.name for c in schema]
    columns = {c.name: [] for c in schema}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file, expected a header row")
        header = [h.strip() for h in header]
        if header != names:
            raise SchemaMismatch(
                f"{path}: header {header} does not match schema columns {names}")
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(schema):
                raise ParseError(
                    f"{path}: row {row_no}: expected {len(schema)} fields, got {len(row)}")
            for col, cell in zip(schema, row):
                cell = cell.strip()
                if col.kind == "numeric":
                    if cell == col.missing_token:
                        columns[col.name].append(None)
                        continue
                    try:
                        columns[col.name].append(float(cell))
                    except ValueError:
                        raise ParseError(
                            f"{path}: row {row_no}, column {col.name!r}: "
                            f"cannot parse {cell!r} as a number")
                else:
                    level = _match_level(cell, col.categories)
                    if level is None:
                        raise ParseError(
                            f"{path}: row {row_no}, column {col.name!r}: "
                            f"value {cell!r} is not a declared level")
                    columns[col.name].append(level)
    return RawTable(columns=columns, n_rows=len(columns[names[0]]))


def feature_names(schema) -> list:
    """Output column names after dummy expansion, in schema order."""
    out = []
    for col in schema:
        if col.kind == "numeric":
            out.append(col.name)
        elif col.kind == "categorical":
            out.extend(f"{col.name}={lv}" for lv in col.categories[1:])
    return out


def preprocess(raw: RawTable, schema):
    """Expand categoricals, impute numeric means, map labels to {1, 2}.

    Returns (features, labels). Column order follows the schema with each
    categorical contributing indicators for its non-reference levels.
    """
    if raw.n_rows == 0:
        raise InvalidParameter("cannot preprocess an empty table")
    blocks = []
    labels = None
    for col in schema:
        values = raw.columns[col.name]
        if col.kind == "numeric":
            arr = np.array([np.nan if v is None else v for v in values], dtype=np.float64)
            mask = np.isnan(arr)
            if mask.all():
                raise AllMissingColumn(
                    f"numeric column {col.name!r} has no observed values")
            if mask.any():
                arr[mask] = arr[~mask].mean()
            blocks.append(arr[:, None])
        elif col.kind == "categorical":
            for lv in col.categories[1:]:
                blocks.append(np.array(
                    [1.0 if v == lv else 0.0 for v in values])[:, None])
        else:
            pos = set(col.positive)
            labels = np.array([1 if v in pos else 2 for v in values], dtype=np.int64)
    features = np.ascontiguousarray(np.hstack(blocks))
    return features, labels


def load_site(path, schema, site_id: int) -> SiteTable:
    features, labels = preprocess(load_csv(path, schema), schema)
    return SiteTable(site_id=site_id, features=features, labels=labels)


def split_train_test(site: SiteTable, fraction: float, seed: int):
    """Seeded stratified split; returns (train DataShard, (test1, test2)).

    The train side takes floor(fraction * class size) rows of each class.
    """
    if not 0.0 < fraction < 1.0:
        raise InvalidParameter(f"fraction must be in (0, 1), got {fraction}")
    idx1 = np.flatnonzero(site.labels == 1)
    idx2 = np.flatnonzero(site.labels == 2)
    if idx1.size < 4 or idx2.size < 4:
        raise TooFewRows(
            f"site {site.site_id}: need >= 4 rows per class, "
            f"got {idx1.size} and {idx2.size}")
    rng = np.random.default_rng(seed)
    idx1 = rng.permutation(idx1)
    idx2 = rng.permutation(idx2)
    k1 = int(fraction * idx1.size)
    k2 = int(fraction * idx2.size)
    train = DataShard(x=site.features[np.sort(idx1[:k1])],
                      y=site.features[np.sort(idx2[:k2])])
    test = (site.features[np.sort(idx1[k1:])], site.features[np.sort(idx2[k2:])])
    return train, test


def degenerate_columns(shards, tol: float = DEGENERATE_VAR_TOL) -> np.ndarray:
    """Feature indices that are constant within both classes at some shard."""
    bad = np.zeros(shards[0].d, dtype=bool)
    for shard in shards:
        bad |= (shard.x.var(axis=0) <= tol) & (shard.y.var(axis=0) <= tol)
    return np.flatnonzero(bad)


def restrict_columns(shards, keep: np.ndarray) -> list:
    return [DataShard(x=np.ascontiguousarray(s.x[:, keep]),
                      y=np.ascontiguousarray(s.y[:, keep])) for s in shards]


def median_threshold(beta_avg: np.ndarray, t_c: float, n_total: int) -> float:
    """t = t_c * sqrt(log d / N) * median of the nonzero |entries|."""
    mags = np.abs(beta_avg)
    mags = mags[mags > SUPPORT_TOL]
    if mags.size == 0:
        return 0.0
    d = beta_avg.size
    return float(t_c) * math.sqrt(math.log(d) / n_total) * float(np.median(mags))


def _site_messages(shards, lambda_c: float, threads: int = 1):
    """Run the worker pipeline per site with per-site sample sizes."""
    d = shards[0].d
    messages = []
    for w, shard in enumerate(shards):
        n = shard.x.shape[0] + shard.y.shape[0]
        lam = lambda_c * math.sqrt(math.log(d) / n)
        summ = summarize_shard(shard)
        beta_hat = local_sparse_lda(summ, lam)
        theta_hat = solve_clime(summ.sigma, lam, threads=threads)
        beta_tilde = debias(summ, beta_hat, theta_hat)
        messages.append(WorkerMessage(
            beta_tilde=beta_tilde, mu1=summ.mu1, mu2=summ.mu2, worker_id=w))
    return messages


def _local_betas(shards, lambda_c: float):
    d = shards[0].d
    betas, midpoints = [], []
    for shard in shards:
        n = shard.x.shape[0] + shard.y.shape[0]
        lam = lambda_c * math.sqrt(math.log(d) / n)
        summ = summarize_shard(shard)
        betas.append(local_sparse_lda(summ, lam))
        midpoints.append(0.5 * (summ.mu1 + summ.mu2))
    return betas, midpoints


def fit_method(method: str, shards, lambda_c: float, t_c: float = 0.0,
               threads: int = 1):
    """Fit one method on training shards; returns (beta, mu_mid).

    distributed: debiased local estimates, averaged and hard-thresholded
    with the median rule. naive: plain average of the local estimates.
    centralized: one estimate from the pooled shards.
    """
    n_total = sum(s.x.shape[0] + s.y.shape[0] for s in shards)
    if method == "distributed":
        messages = _site_messages(shards, lambda_c, threads=threads)
        plain = aggregate(messages, 0.0)
        t_val = median_threshold(plain.beta_avg, t_c, n_total)
        return hard_threshold(plain.beta_avg, t_val), plain.mu_mid
    if method == "naive":
        betas, midpoints = _local_betas(shards, lambda_c)
        return naive_average(betas), np.mean(midpoints, axis=0)
    if method == "centralized":
        pooled = summarize_shard(pool_shards(shards))
        d = shards[0].d
        lam = lambda_c * math.sqrt(math.log(d) / n_total)
        beta = solve_dantzig(DantzigProblem(pooled.sigma, pooled.mud, lam)).beta
        return beta, 0.5 * (pooled.mu1 + pooled.mu2)
    raise InvalidParameter(f"unknown method {method!r}")


def _fold_indices(n: int, k: int, rng) -> list:
    """Split a permutation of range(n) into k nearly equal chunks."""
    return np.array_split(rng.permutation(n), k)


def make_folds(train_sites, k: int, seed: int) -> list:
    """Within-site stratified folds.

    Returns a list of k entries ((fold_train_shards, held_out_x, held_out_y));
    every fold round keeps one shard per site so the distributed structure
    survives cross-validation.
    """
    if k < 2:
        raise InvalidParameter(f"need k >= 2 folds, got {k}")
    rng = np.random.default_rng(seed)
    chunks = []  # per site: (x chunks, y chunks)
    for site_no, shard in enumerate(train_sites):
        n1, n2 = shard.x.shape[0], shard.y.shape[0]
        if n1 - math.ceil(n1 / k) < 2 or n2 - math.ceil(n2 / k) < 2:
            raise FoldTooSmall(
                f"site {site_no}: classes of size {n1} and {n2} cannot keep "
                f">= 2 training rows per class with k={k} folds")
        chunks.append((_fold_indices(n1, k, rng), _fold_indices(n2, k, rng)))
    folds = []
    for f in range(k):
        fold_shards, ho_x, ho_y = [], [], []
        for shard, (cx, cy) in zip(train_sites, chunks):
            keep_x = np.sort(np.concatenate([cx[g] for g in range(k) if g != f]))
            keep_y = np.sort(np.concatenate([cy[g] for g in range(k) if g != f]))
            fold_shards.append(DataShard(x=shard.x[keep_x], y=shard.y[keep_y]))
            if cx[f].size:
                ho_x.append(shard.x[np.sort(cx[f])])
            if cy[f].size:
                ho_y.append(shard.y[np.sort(cy[f])])
        folds.append((
            fold_shards,
            np.vstack(ho_x) if ho_x else np.empty((0, train_sites[0].d)),
            np.vstack(ho_y) if ho_y else np.empty((0, train_sites[0].d)),
        ))
    return folds


def kfold_tune(train_sites, c_grid=C_GRID, t_grid=T_GRID, k: int = 5,
               seed: int = 0, method: str = "distributed",
               threads: int = 1) -> TuningResult:
    """Pick (C, t_c) minimizing k-fold CV misclassification.

    The t grid only matters for the distributed method; the baselines ignore
    the threshold, so for them a single t column is evaluated. Ties go to
    the smaller C index, then the smaller t index.
    """
    c_grid = list(c_grid)
    t_grid = list(t_grid)
    if not c_grid or not t_grid:
        raise InvalidParameter("tuning grids must be nonempty")
    eff_t = t_grid if method == "distributed" else t_grid[:1]
    folds = make_folds(train_sites, k, seed)
    scores = np.zeros((len(c_grid), len(eff_t)))
    for fold_shards, ho_x, ho_y in folds:
        drop = degenerate_columns(fold_shards)
        keep = np.setdiff1d(np.arange(train_sites[0].d), drop)
        shards = restrict_columns(fold_shards, keep) if drop.size else fold_shards
        fx, fy = ho_x[:, keep], ho_y[:, keep]
        n_total = sum(s.x.shape[0] + s.y.shape[0] for s in shards)
        for ci, c in enumerate(c_grid):
            if method == "distributed":
                # workers run once per C; the t sweep reuses their output
                messages = _site_messages(shards, c, threads=threads)
                plain = aggregate(messages, 0.0)
                for ti, t_c in enumerate(eff_t):
                    t_val = median_threshold(plain.beta_avg, t_c, n_total)
                    beta = hard_threshold(plain.beta_avg, t_val)
                    scores[ci, ti] += misclassification_rate(
                        fx, fy, beta, plain.mu_mid)
            else:
                beta, mu_mid = fit_method(method, shards, c, threads=threads)
                scores[ci, 0] += misclassification_rate(fx, fy, beta, mu_mid)
    scores /= len(folds)
    flat = np.argmin(scores)  # ties: argmin takes the first, C-major order
    ci, ti = np.unravel_index(flat, scores.shape)
    return TuningResult(lambda_c=float(c_grid[ci]), t_c=float(eff_t[ti]),
                        cv_misclass=float(scores[ci, ti]))


REAL_METHODS = ("distributed", "naive", "centralized")


def run_real(sites, reps: int = 10, seed: int = 0, k: int = 5,
             fraction: float = 0.5, c_grid=C_GRID, t_grid=T_GRID,
             threads: int = 1):
    """Full protocol over ``reps`` random splits of the site tables.

    Each rep: stratified per-site half split, per-method k-fold tuning on
    the training shards, refit on the full training data with the tuned
    constants, misclassification on the pooled held-out rows.  Returns
    ``(rates, rows)`` where ``rates`` maps method -> per-rep rate list and
    ``rows`` is [(method, mean, std), ...] with the sample std (0.0 when
    reps == 1).
    """
    if reps < 1:
        raise InvalidParameter(f"reps must be >= 1, got {reps}")
    if not sites:
        raise InvalidParameter("no site tables given")
    d = sites[0].features.shape[1]
    rates = {method: [] for method in REAL_METHODS}
    for rep in range(reps):
        train_shards, test_x, test_y = [], [], []
        for idx, site in enumerate(sites):
            split_seed = int(np.random.SeedSequence(
                entropy=seed, spawn_key=(rep, idx)).generate_state(
                    1, np.uint64)[0])
            train, (t1, t2) = split_train_test(site, fraction, split_seed)
            train_shards.append(train)
            test_x.append(t1)
            test_y.append(t2)
        tx, ty = np.vstack(test_x), np.vstack(test_y)
        drop = degenerate_columns(train_shards)
        keep = np.setdiff1d(np.arange(d), drop)
        shards = (restrict_columns(train_shards, keep)
                  if drop.size else train_shards)
        tx, ty = tx[:, keep], ty[:, keep]
        tune_seed = int(np.random.SeedSequence(
            entropy=seed, spawn_key=(rep,)).generate_state(1, np.uint64)[0])
        for method in REAL_METHODS:
            tuned = kfold_tune(shards, c_grid, t_grid, k=k, seed=tune_seed,
                               method=method, threads=threads)
            beta, mu_mid = fit_method(method, shards, tuned.lambda_c,
                                      tuned.t_c, threads=threads)
            rates[method].append(
                misclassification_rate(tx, ty, beta, mu_mid))
    rows = []
    for method in REAL_METHODS:
        vals = np.asarray(rates[method])
        std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
        rows.append((method, float(vals.mean()), std))
    return rates, rows
