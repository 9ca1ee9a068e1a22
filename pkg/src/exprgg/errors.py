"""Exception types shared across the package."""


class DegenerateChainError(ValueError):
    """Raised when a connectivity chain has no usable transition structure.

    Happens when disconnection (or reconnection) is impossible to machine
    precision, e.g. every gap exceedance probability underflows to zero.
    """


class QuadratureError(RuntimeError):
    """Numerical integration failed to reach the requested tolerance."""

    def __init__(self, message: str, gap_index: int | None = None, step: int | None = None):
        super().__init__(message)
        self.gap_index = gap_index
        self.step = step


class InsufficientDataError(RuntimeError):
    """An estimator saw no samples for a conditioning event."""
