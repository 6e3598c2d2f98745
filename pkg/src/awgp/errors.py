"""Shared exception types."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularityError(DomainError):
    """Pointwise evaluation was requested at a non-integrable singularity."""


class ConvergenceError(RuntimeError):
    """A series or quadrature failed to meet its accuracy target."""


class NotPositiveDefiniteError(ValueError):
    """A covariance matrix failed its positive-definiteness check.

    ``pivot_index`` is the 0-based index of the first failing Cholesky pivot.
    """

    def __init__(self, pivot_index: int, message: str | None = None):
        self.pivot_index = pivot_index
        super().__init__(message or f"matrix is not positive definite (pivot {pivot_index})")


class MeasureOrderingError(ValueError):
    """Component intensity measures violate the absolute-continuity ordering."""


class SimulationError(RuntimeError):
    """A simulated path left the admissible state space.

    ``path_index`` identifies the first offending path; nothing is clamped,
    since silent clamping would bias cost estimates.
    """

    def __init__(self, path_index: int, message: str | None = None):
        self.path_index = path_index
        super().__init__(message or f"path {path_index} exploded (|state| > 1e12)")
