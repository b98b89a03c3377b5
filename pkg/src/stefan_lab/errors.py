"""Exception hierarchy.

Validation problems derive from :class:`InputError` (CLI exit code 2),
numerical failures from :class:`NumericError` (CLI exit code 3).
"""


class StefanLabError(Exception):
    """Base class for every error raised by the package."""


class InputError(StefanLabError, ValueError):
    """Invalid argument, shape or parameter value."""


class ConfigError(InputError):
    """Malformed or invalid configuration file."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class DomainError(InputError):
    """A point or parameter lies outside the admissible domain."""


class RangeError(InputError):
    """A requested time or radius is outside the available data."""


class FitError(InputError):
    """Not enough usable data for a fit."""


class NumericError(StefanLabError, ArithmeticError):
    """A numerical procedure produced an unusable result."""


class ConvergenceError(NumericError):
    """An iterative method failed to reach its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class DegenerateError(NumericError):
    """A denominator or normalizer vanished."""
