"""Exception hierarchy shared by all modules."""


class RoughMaxError(Exception):
    """Base class for domain errors raised by this package."""


class DimensionMismatch(RoughMaxError, ValueError):
    pass


class UnsupportedDimension(RoughMaxError, ValueError):
    pass


class InvalidGridError(RoughMaxError, ValueError):
    pass


class DegenerateKernelError(RoughMaxError, ValueError):
    """Raised when a kernel has zero L1 norm where a positive one is required."""


class InvalidPolicyError(RoughMaxError, ValueError):
    pass


class SupportViolation(RoughMaxError, ValueError):
    """Raised when f is not supported well inside the near-field radius."""

    def __init__(self, message, support_radius=None):
        super().__init__(message)
        self.support_radius = support_radius


class LevelTooSmallError(RoughMaxError, ValueError):
    """Raised when no representable dyadic root has average <= t."""
