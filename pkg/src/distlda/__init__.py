"""Communication-efficient distributed sparse linear discriminant analysis.

Each machine fits a sparse discriminant direction from its own shard
(an l1-minimization under a sup-norm residual bound), debiases it with a
constrained precision-matrix estimate, and ships one O(d) vector to the
master, which averages and hard-thresholds.  The package also carries the
centralized and naive-averaging baselines, a synthetic experiment harness,
a multi-site CSV pipeline with cross-validated tuning, and a CLI
(``distlda simulate|bench|real|solve``).
"""

from .aggregate import (
    AggregateEstimate,
    aggregate,
    centralized,
    hard_threshold,
    naive_average,
    pool_shards,
)
from .datagen import (
    ExperimentConfig,
    TrueModel,
    ar1_covariance,
    benchmark_model,
    cell_seed,
    generate_shards,
    sample_test_set,
)
from .errors import (
    AllMissingColumn,
    DegenerateShard,
    DimensionMismatch,
    DistLdaError,
    EmptyMessageSet,
    EmptyTestSet,
    FoldTooSmall,
    InfeasibleProblem,
    InvalidParameter,
    NotPositiveDefinite,
    ParseError,
    PivotLimitExceeded,
    SchemaMismatch,
    SolverError,
    TooFewRows,
)
from .experiments import (
    RECORD_COLUMNS,
    RunRecord,
    lambda_from_constant,
    run_bench,
    run_simulation,
    synthetic_threshold,
    write_bench,
    write_records,
)
from .ingest import (
    ColumnSchema,
    SiteTable,
    TuningResult,
    fit_method,
    kfold_tune,
    load_csv,
    load_schema,
    load_site,
    preprocess,
    run_real,
    split_train_test,
)
from .metrics import (
    REPORT_COLUMNS,
    EvalReport,
    classify,
    error_norms,
    f1_support,
    misclassification_rate,
    sign_consistent,
)
from .solver import (
    DantzigProblem,
    DantzigSolution,
    solve_clime,
    solve_clime_column,
    solve_dantzig,
)
from .worker import (
    DataShard,
    ShardSummary,
    WorkerMessage,
    debias,
    local_sparse_lda,
    run_worker,
    summarize_shard,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateEstimate",
    "AllMissingColumn",
    "ColumnSchema",
    "DantzigProblem",
    "DantzigSolution",
    "DataShard",
    "DegenerateShard",
    "DimensionMismatch",
    "DistLdaError",
    "EmptyMessageSet",
    "EmptyTestSet",
    "EvalReport",
    "ExperimentConfig",
    "FoldTooSmall",
    "InfeasibleProblem",
    "InvalidParameter",
    "NotPositiveDefinite",
    "ParseError",
    "PivotLimitExceeded",
    "RECORD_COLUMNS",
    "REPORT_COLUMNS",
    "RunRecord",
    "SchemaMismatch",
    "ShardSummary",
    "SiteTable",
    "SolverError",
    "TooFewRows",
    "TrueModel",
    "TuningResult",
    "WorkerMessage",
    "aggregate",
    "ar1_covariance",
    "benchmark_model",
    "cell_seed",
    "centralized",
    "classify",
    "debias",
    "error_norms",
    "f1_support",
    "fit_method",
    "generate_shards",
    "hard_threshold",
    "kfold_tune",
    "lambda_from_constant",
    "load_csv",
    "load_schema",
    "load_site",
    "local_sparse_lda",
    "misclassification_rate",
    "naive_average",
    "pool_shards",
    "preprocess",
    "run_bench",
    "run_real",
    "run_simulation",
    "run_worker",
    "sample_test_set",
    "sign_consistent",
    "solve_clime",
    "solve_clime_column",
    "solve_dantzig",
    "split_train_test",
    "summarize_shard",
    "synthetic_threshold",
    "write_bench",
    "write_records",
]
