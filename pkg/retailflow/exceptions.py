"""
This module includes all custom warnings and error classes used across
retailflow.

Errors are grouped under three families which the command line maps onto
exit codes: configuration problems, data problems and numerical problems.
"""
__all__ = [
    'RetailflowError',
    'ConfigError',
    'UnknownConfigKeyError',
    'DataError',
    'MalformedRowError',
    'PrecisionExceededError',
    'CalendarGapError',
    'IdMismatchError',
    'NumericalError',
    'EmptySeriesError',
    'DegenerateError',
    'SingularMatrixError',
    'InsufficientPeriodsError',
    'InsufficientGroupsError',
    'HansenHodrickFallbackWarning',
    'SkippedPeriodWarning',
    'SkippedFormationWarning',
    'CrossedQuoteWarning'
]


class RetailflowError(Exception):
    """Base class of every error raised on purpose by retailflow.

    The `module` and `operation` attributes are filled in by
    `retailflow.decorators.operation_context` when the error leaves a public
    operation.
    """
    exit_code = 1
    module = None
    operation = None

    def report(self):
        """Machine-readable description of the error."""
        return {
            'error': type(self).__name__,
            'module': self.module,
            'operation': self.operation,
            'message': str(self),
            'exit_code': self.exit_code
        }


class ConfigError(RetailflowError, ValueError):
    """Exception class to raise if the run configuration is invalid."""
    exit_code = 2


class UnknownConfigKeyError(ConfigError, KeyError):
    """Exception class to raise if a configuration key is not recognised."""

    def __str__(self):
        return Exception.__str__(self)


class DataError(RetailflowError, ValueError):
    """Exception class to raise if input data violates its contract."""
    exit_code = 3


class MalformedRowError(DataError):
    """Exception class to raise if a CSV row cannot be parsed.

    Parameters
    ----------
    message: str
        Description of the problem.

    line_number: int, optional (default=None)
        One-based line number in the source file, header included.

    """
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = 'line {}: {}'.format(line_number, message)
        super().__init__(message)
        self.line_number = line_number


class PrecisionExceededError(MalformedRowError):
    """Exception class to raise if a price carries more than four decimals.

    Subpenny classification works on the third and fourth decimal digit so
    any further digit would be silently lost.
    """


class CalendarGapError(DataError):
    """Exception class to raise if weeks of the trading calendar are not
    contiguous or overlap."""


class IdMismatchError(DataError):
    """Exception class to raise if trade identifiers cannot be joined."""


class NumericalError(RetailflowError, ArithmeticError):
    """Base class of errors raised by the estimators."""
    exit_code = 4


class EmptySeriesError(NumericalError):
    """Exception class to raise if a statistic is requested on no data."""


class DegenerateError(NumericalError):
    """Exception class to raise if a statistic is undefined for the given
    data, for example a correlation of a constant series."""


class SingularMatrixError(NumericalError):
    """Exception class to raise if a design matrix is rank deficient.

    Parameters
    ----------
    message: str
        Description of the problem.

    column: str, optional (default=None)
        Name of the column detected as linearly dependent on the others.

    """
    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class InsufficientPeriodsError(NumericalError):
    """Exception class to raise if a time series is too short for the
    requested number of lags."""


class InsufficientGroupsError(NumericalError):
    """Exception class to raise if there are fewer items than groups to
    split them into."""


class HansenHodrickFallbackWarning(UserWarning):
    """Warning used to notify that the Hansen-Hodrick variance was not
    positive and the Bartlett (Newey-West) value was used instead."""


class SkippedPeriodWarning(UserWarning):
    """Warning used to notify that cross-sections without enough observations
    were left out of a Fama-MacBeth estimation."""


class SkippedFormationWarning(UserWarning):
    """Warning used to notify that portfolio formations were skipped because
    some bucket had too few stocks."""


class CrossedQuoteWarning(UserWarning):
    """Warning used to notify that crossed or locked quotes were found.

    Such quotes are kept and flagged, trades matched against them stay
    unsigned by the quote midpoint method.
    """
