"""Semantic exception hierarchy shared across the package."""


class PeriodicUrnError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParams(PeriodicUrnError, ValueError):
    """A parameter is outside its documented domain."""


class UnbalancedMatrix(InvalidParams):
    """A replacement matrix adds a different number of balls per colour."""


class EmptyUrn(InvalidParams):
    """The urn starts with no balls at all."""


class NonZeroResidual(PeriodicUrnError):
    """A coefficient-level differential-equation check failed.

    Carries the first offending position: ``n`` is the step (row) and ``k``
    the black-ball count, or ``None`` for a totals-only (ODE) check.
    """

    def __init__(self, message: str, n: int, k: int | None = None):
        super().__init__(message)
        self.n = n
        self.k = k


class BoundExceeded(PeriodicUrnError):
    """An exhaustive enumeration would exceed its configured size bound."""


class InconsistentTree(PeriodicUrnError):
    """The corner-correspondence tree cannot satisfy its vertex-count invariant."""


class EmptySample(PeriodicUrnError, ValueError):
    """A statistic was requested over an empty sample."""


class InsufficientCounts(PeriodicUrnError):
    """Expected counts are too small for a valid chi-square test."""
