"""Exception types shared across the package."""


class LevyExitError(Exception):
    """Base class for all package errors."""


class TimeOutOfRange(LevyExitError):
    """Evaluation outside a path's domain [0, horizon)."""


class DimensionError(LevyExitError):
    """Dimension mismatch, or a scalar-only operation on a vector path."""


class HorizonMismatch(LevyExitError):
    """Time change and path horizons are incompatible."""


class InvalidTimeChange(LevyExitError):
    """Anchors are not a strictly increasing bijection fixing endpoints."""


class NeverExits(LevyExitError):
    """Entrance point requested but the entrance time is infinite."""


class UndeterminedClassification(LevyExitError):
    """Classification cannot be decided within the path horizon."""


class ApproximationBudgetExceeded(LevyExitError):
    """Certified refinement could not reach the requested tolerance."""


class QuadratureFailure(LevyExitError):
    """Quadrature could not be completed; partial results may be attached."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ControlOutOfRange(LevyExitError):
    """Control value outside the admissible interval."""


class NonFiniteState(LevyExitError):
    """Simulation produced a non-finite state (coefficient blow-up)."""


class ConfigError(LevyExitError):
    """Bad configuration file or unknown experiment name."""
