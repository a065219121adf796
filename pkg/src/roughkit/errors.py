"""Exception hierarchy shared by every roughkit module."""


class RoughkitError(Exception):
    """Base class for all library errors."""


class ParameterError(RoughkitError, ValueError):
    """An argument lies outside the range where the computation is defined."""


class DivergenceError(ParameterError):
    """A series or sewing exponent would diverge (e.g. zeta at theta <= 1)."""


class GridTooCoarseError(ParameterError):
    """A single grid cell already violates a smallness requirement."""


class HorizonTooLongError(ParameterError):
    """The time horizon violates a solution-space assumption.

    ``admissible`` carries the longest prefix (as a grid index) for which the
    assumption still holds, so callers can retry on a shorter horizon.
    """

    def __init__(self, message, admissible=None):
        super().__init__(message)
        self.admissible = admissible


class ConsistencyError(RoughkitError):
    """An algebraic identity (Chen, group increments, ...) failed beyond tolerance."""


class DiagnosticError(RoughkitError):
    """A numerical diagnostic failed, e.g. an observed contraction factor is too large."""
