"""Exception hierarchy shared across the package."""


class ZenoLabError(Exception):
    """Base class for all package errors."""


class DimensionError(ZenoLabError):
    """Operand shapes are incompatible with the requested operation."""


class NumericalError(ZenoLabError):
    """An iterative numerical procedure failed to converge."""


class ResolventSingularError(ZenoLabError):
    """The shifted operator z - A is (numerically) singular.

    Carries the smallest singular value encountered in ``min_singular_value``.
    """

    def __init__(self, message, min_singular_value=None):
        super().__init__(message)
        self.min_singular_value = min_singular_value


class ContourError(ZenoLabError):
    """A quadrature contour is crossed by or too close to an eigenvalue."""


class ConstraintError(ZenoLabError):
    """A structural constraint (e.g. the trace-preservation identity) is violated."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ProjectorError(ZenoLabError):
    """An operator expected to be idempotent is not."""


class ParameterError(ZenoLabError):
    """Model parameters are outside their admissible domain."""


class StateError(ZenoLabError):
    """A matrix expected to be a density matrix is not one."""


class FaithfulnessError(ZenoLabError):
    """A state expected to be positive definite is singular."""


class NoGapError(ZenoLabError):
    """A peripheral cluster cannot be separated from the bulk spectrum."""


class AdmissibilityError(ZenoLabError):
    """An operation requires an admissible peripheral report."""


class EstimationError(ZenoLabError):
    """A limit-projector estimate did not stabilise."""


class ValidationError(ZenoLabError):
    """An experiment configuration failed validation."""
