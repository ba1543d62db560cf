"""Synthetic ground truth and seeded shard generation.

The benchmark population is the AR(1) Gaussian pair used throughout the
experiments: covariance entries rho^|j-k|, class means zero and
(1,...,1,0,...,0) with ten leading ones, and the population discriminant
direction obtained by solving sigma_star @ beta_star = mu1 - mu2.

Shards are drawn with counter-based Philox generators keyed per worker
(seed XOR worker_id), so any shard can be regenerated independently of the
others and generation order never matters.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, ParseError
from .linalg import cholesky, solve_cholesky

#: entries of beta_star at or below this magnitude count as exact zeros
SUPPORT_TOL = 1e-10


@dataclass(frozen=True)
class TrueModel:
    """Population parameters behind a synthetic experiment."""

    sigma_star: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    beta_star: np.ndarray
    s: int
    chol: np.ndarray

    @property
    def dim(self) -> int:
        return self.beta_star.shape[0]

    @property
    def mu_d(self) -> np.ndarray:
        return self.mu1 - self.mu2


@dataclass(frozen=True)
class ExperimentConfig:
    """One synthetic run: population, sharding, tuning constants, seed."""

    d: int
    n_total: int
    m: int
    r: float = 0.5
    rho: float = 0.8
    seed: int = 0
    lambda_c: float = 1.0
    t_c: float = 0.5
    reps: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise InvalidParameter(f"d must be >= 1, got {self.d}")
        if self.m < 1:
            raise InvalidParameter(f"m must be >= 1, got {self.m}")
        if self.n_total % self.m != 0:
            raise InvalidParameter(
                f"n_total={self.n_total} is not divisible by m={self.m}"
            )
        if not 0.0 < self.r <= 0.5:
            raise InvalidParameter(f"r must be in (0, 1/2], got {self.r}")
        n = self.n_total // self.m
        n1 = self.r * n
        if abs(n1 - round(n1)) > 1e-9:
            raise InvalidParameter(
                f"r*(N/m) = {n1} is not an integer (r={self.r}, n={n})"
            )
        if round(n1) < 2 or n - round(n1) < 2:
            raise InvalidParameter(
                f"each shard needs >= 2 rows per class, got n1={round(n1)}, "
                f"n2={n - round(n1)}"
            )
        if not np.isfinite(self.lambda_c) or self.lambda_c < 0:
            raise InvalidParameter(f"lambda_c must be >= 0, got {self.lambda_c}")
        if not np.isfinite(self.t_c) or self.t_c < 0:
            raise InvalidParameter(f"t_c must be >= 0, got {self.t_c}")
        if self.reps < 1:
            raise InvalidParameter(f"reps must be >= 1, got {self.reps}")

    @property
    def n(self) -> int:
        """Per-shard sample count."""
        return self.n_total // self.m

    @property
    def n1(self) -> int:
        return round(self.r * self.n)

    @property
    def n2(self) -> int:
        return self.n - self.n1


def ar1_covariance(d: int, rho: float) -> np.ndarray:
    """Covariance with entries rho^|j-k|; positive definite for |rho| < 1."""
    if d < 1:
        raise InvalidParameter(f"d must be >= 1, got {d}")
    if not np.isfinite(rho) or abs(rho) >= 1.0:
        raise InvalidParameter(f"|rho| must be < 1, got {rho}")
    idx = np.arange(d)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def benchmark_model(d: int, rho: float = 0.8) -> TrueModel:
    """The benchmark population: mu1 = 0, mu2 with ten leading ones.

    beta_star solves sigma_star @ beta = mu1 - mu2 through the Cholesky
    factor, and its support size is counted at tolerance 1e-10.
    """
    if d < 11:
        raise InvalidParameter(f"benchmark model needs d >= 11, got {d}")
    sigma_star = ar1_covariance(d, rho)
    mu1 = np.zeros(d)
    mu2 = np.zeros(d)
    mu2[:10] = 1.0
    chol = cholesky(sigma_star)
    beta_star = solve_cholesky(chol, mu1 - mu2)
    s = int(np.count_nonzero(np.abs(beta_star) > SUPPORT_TOL))
    return TrueModel(
        sigma_star=sigma_star, mu1=mu1, mu2=mu2,
        beta_star=beta_star, s=s, chol=chol,
    )


def shard_rng(seed: int, worker_id: int) -> np.random.Generator:
    """Counter-based substream for one worker: Philox keyed by seed XOR id."""
    key = (int(seed) ^ int(worker_id)) & 0xFFFFFFFFFFFFFFFF
    return np.random.Generator(np.random.Philox(key=key))


def generate_shards(model: TrueModel, cfg: ExperimentConfig) -> list:
    """Draw the m shards for one run; fully determined by cfg.seed.

    Class-1 rows are drawn before class-2 rows inside each shard; rows are
    mu + z @ chol.T with z standard normal.
    """
    from .worker import DataShard

    if model.dim != cfg.d:
        raise InvalidParameter(
            f"model dimension {model.dim} does not match config d={cfg.d}"
        )
    lt = model.chol.T
    shards = []
    for worker_id in range(cfg.m):
        rng = shard_rng(cfg.seed, worker_id)
        z1 = rng.standard_normal((cfg.n1, cfg.d))
        z2 = rng.standard_normal((cfg.n2, cfg.d))
        x = model.mu1 + z1 @ lt
        y = model.mu2 + z2 @ lt
        shards.append(DataShard(x=x, y=y))
    return shards


def sample_test_set(model: TrueModel, n_per_class: int,
                    seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Fresh evaluation draw (class-1 rows, class-2 rows), seeded like shards
    but on its own substream id so it never overlaps training data."""
    rng = shard_rng(seed, 0x7E57)
    z1 = rng.standard_normal((n_per_class, model.dim))
    z2 = rng.standard_normal((n_per_class, model.dim))
    return model.mu1 + z1 @ model.chol.T, model.mu2 + z2 @ model.chol.T


def cell_seed(base_seed: int, m: int, rep: int) -> int:
    """Derived seed for one (m, rep) sweep cell; distinct cells get
    independent streams."""
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(int(m), int(rep)))
    return int(ss.generate_state(1, np.uint64)[0])


def dump_shard_csv(shard, directory: str, worker_id: int) -> tuple[str, str]:
    """Write one shard as two CSVs (class1/class2), header = column indices."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for label, block in (("class1", shard.x), ("class2", shard.y)):
        path = os.path.join(directory, f"shard{worker_id:03d}_{label}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([str(j) for j in range(block.shape[1])])
            for row in block:
                writer.writerow([repr(float(v)) for v in row])
        paths.append(path)
    return tuple(paths)


def load_shard_csv(path_class1: str, path_class2: str):
    """Read a shard back from :func:`dump_shard_csv` output."""
    from .worker import DataShard

    def read_block(path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ParseError(f"{path}: empty file, expected a header row")
            expected = [str(j) for j in range(len(header))]
            if header != expected:
                raise ParseError(
                    f"{path}: header {header[:5]}... is not column indices"
                )
            rows = []
            for i, row in enumerate(reader):
                if len(row) != len(header):
                    raise ParseError(
                        f"{path}: row {i + 2} has {len(row)} cells, "
                        f"expected {len(header)}"
                    )
                try:
                    rows.append([float(v) for v in row])
                except ValueError as exc:
                    raise ParseError(f"{path}: row {i + 2}: {exc}") from exc
        return np.array(rows, dtype=np.float64)

    return DataShard(x=read_block(path_class1), y=read_block(path_class2))
