"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError and its
subclasses -> 2, NumericError -> 3.
"""


class ContactNetError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(ContactNetError):
    """Invalid CLI usage or experiment configuration."""


class DataError(ContactNetError):
    """Input data is malformed or unsuitable for the requested operation."""


class ParseError(DataError):
    """Malformed input file. Carries a 1-based line number when known."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class UndefinedStatisticError(DataError):
    """The requested statistic is undefined for this graph (e.g. density with N < 2)."""


class FitError(DataError):
    """The model cannot be fitted to the given graph or partition."""


class NumericError(ContactNetError):
    """A numerical routine failed (non-convergence, singular scaling)."""
