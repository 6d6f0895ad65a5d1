"""Exception hierarchy.

Errors split into two families so the CLI can map them onto exit codes:
``DataError`` (bad inputs, exit 2) and ``NumericalError`` (exit 3).
"""


class SpdFusionError(Exception):
    """Base class for every error raised by this package."""


class DataError(SpdFusionError, ValueError):
    pass


class NumericalError(SpdFusionError, ArithmeticError):
    pass


class ConfigError(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class BlockMismatch(DimensionMismatch):
    pass


class DegenerateSegment(DataError):
    pass


class EmptyChannel(DataError):
    pass


class EmptySet(DataError):
    pass


class InconsistentLandmarkCount(DataError):
    pass


class SingleClass(DataError):
    pass


class TooShort(DataError):
    pass


class TooFewSubjects(DataError):
    pass


class MissingChannel(DataError):
    pass


class BadHeader(DataError):
    pass


class LabelMissing(DataError):
    pass


class NonFinite(NumericalError):
    pass


class NotPositiveDefinite(NumericalError):
    """Raised when a matrix expected to be SPD is not.

    ``min_eig`` holds the offending smallest eigenvalue so callers can decide
    how much ridge to add before retrying.
    """

    def __init__(self, message, min_eig=None):
        super().__init__(message)
        self.min_eig = min_eig


class NoConvergence(NumericalError):
    """Iteration cap hit. ``last`` and ``residual`` describe the final iterate."""

    def __init__(self, message, last=None, residual=None):
        super().__init__(message)
        self.last = last
        self.residual = residual
