"""Exception hierarchy.

Numerical failures (``NumericalFailure`` subclasses) map to CLI exit code 3,
configuration problems (``ConfigError``) to exit code 2.
"""


class SimbootError(Exception):
    """Base class for all package errors."""


class NumericalFailure(SimbootError):
    """A computation could not be completed for numerical reasons."""


class DegenerateWeights(NumericalFailure):
    """Kernel weights sum to (almost) zero: no data inside the kernel support."""


class NonPositiveCurvature(NumericalFailure):
    """Weighted curvature is not positive definite (e.g. negative multipliers)."""


class TooManyRejections(NumericalFailure):
    """A bootstrap replicate failed the curvature guard too many times."""


class SingularH2(NumericalFailure):
    """The score-variance matrix is not positive definite."""


class InvalidTau(SimbootError, ValueError):
    pass


class InvalidAlpha(SimbootError, ValueError):
    pass


class NegativeMultiplier(SimbootError, ValueError):
    """The quantile family needs a nonnegative multiplier law."""


class DimensionMismatch(SimbootError, ValueError):
    pass


class ConfigError(SimbootError, ValueError):
    """Bad run configuration; ``key`` and ``line`` locate the problem when known."""

    def __init__(self, message, key=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line
