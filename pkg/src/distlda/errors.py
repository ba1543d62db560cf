"""Exception types shared across the package.

Every error raised by distlda derives from :class:`DistLdaError` so callers
can catch the whole family with one clause.  The CLI maps subfamilies to
process exit codes (usage -> 1, infeasible -> 2, I/O -> 3).
"""

__all__ = [
    "DistLdaError",
    "DimensionMismatch",
    "NotPositiveDefinite",
    "InvalidParameter",
    "SolverError",
    "InfeasibleProblem",
    "PivotLimitExceeded",
    "DegenerateShard",
    "EmptyMessageSet",
    "EmptyTestSet",
    "SchemaMismatch",
    "ParseError",
    "AllMissingColumn",
    "TooFewRows",
    "FoldTooSmall",
]


class DistLdaError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(DistLdaError):
    """Operands have incompatible shapes."""


class NotPositiveDefinite(DistLdaError):
    """A matrix required to be positive definite is not (within tolerance)."""


class InvalidParameter(DistLdaError):
    """A scalar or configuration parameter is outside its legal range."""


class SolverError(DistLdaError):
    """Base class for linear-programming solver failures."""


class InfeasibleProblem(SolverError):
    """The feasible set of the linear program is provably empty."""


class PivotLimitExceeded(SolverError):
    """The simplex method hit its pivot cap before reaching optimality."""


class DegenerateShard(DistLdaError):
    """A data shard has too few rows in one of the classes."""


class EmptyMessageSet(DistLdaError):
    """Aggregation was asked to combine zero worker messages."""


class EmptyTestSet(DistLdaError):
    """A misclassification rate was requested over zero test rows."""


class SchemaMismatch(DistLdaError):
    """A CSV header does not match the declared column schema."""


class ParseError(DistLdaError):
    """A CSV cell could not be parsed under the declared schema."""


class AllMissingColumn(DistLdaError):
    """A numeric column contains no observed values, so no mean exists."""


class TooFewRows(DistLdaError):
    """A table is too small to be split as requested."""


class FoldTooSmall(DistLdaError):
    """Cross-validation folds would leave a class with fewer than two rows."""
