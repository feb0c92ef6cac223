"""Errors raised across hetr.

Everything a user can fix by changing inputs is a ValueError, so callers that
only catch ValueError keep working.
"""

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NON_CONVERGENCE = 3


class RegionNotFoundError(ValueError):
    pass


class MalformedRowError(ValueError):
    pass


class NonContiguousDatesError(ValueError):
    pass


class SeriesTooShortError(ValueError):
    pass


class InsufficientDateRangeError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


class NonFiniteStateError(ValueError):
    pass


class DegenerateWindowError(ValueError):
    """Window with no usable (positive) incidence."""


class TooFewDrawsError(ValueError):
    pass


class HorizonMismatchError(ValueError):
    pass


class MissingPopulationError(ValueError):
    """Population-capped simulation requested on a series without population."""


class ConfigError(ValueError):
    pass


class NonConvergenceError(RuntimeError):
    """Chains failed the R-hat / effective sample size thresholds."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics
