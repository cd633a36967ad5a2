"""Exception types shared across the package.

Each class maps onto one of the CLI exit codes (2 config, 3 data, 4 numeric).
"""


class ElaExplainError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(ElaExplainError, ValueError):
    """An argument is outside its documented domain."""


class DimensionMismatchError(InvalidArgumentError):
    """A vector or matrix has the wrong length/width."""


class SchemaMismatchError(ElaExplainError, ValueError):
    """Feature maps or models disagree on their feature schema."""


class DataError(ElaExplainError):
    """Malformed or inconsistent input data (CSV rows, fold plans, ...)."""


class ConfigError(ElaExplainError):
    """Invalid run configuration."""


class NumericFailure(ElaExplainError, ArithmeticError):
    """A numerical routine produced non-finite values."""
