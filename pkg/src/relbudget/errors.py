"""Exception hierarchy shared by every module."""


class RelBudgetError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RelBudgetError, ValueError):
    """An argument lies outside the domain of the function."""


class NumericError(RelBudgetError, ArithmeticError):
    """An iteration failed to converge or a quantity left its valid range."""


class DegenerateError(RelBudgetError):
    """The model has no usable mass (e.g. success is numerically impossible)."""


class DataError(RelBudgetError):
    """Input data is malformed or too sparse for the requested analysis."""
