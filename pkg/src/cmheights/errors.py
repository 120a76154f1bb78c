"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of the operation."""


class TotallyRealError(DomainError):
    """A CM field was requested, but the construction yields a totally real field."""


class PoleError(DomainError):
    """Evaluation was requested at a pole."""


class PrecisionError(ArithmeticError):
    """The configured evaluation depth cannot certify the requested accuracy.

    Raised instead of returning a silently inaccurate value.
    """


class ConsistencyError(RuntimeError):
    """An internal cross-check failed; indicates a bug, never swallowed."""


class DegenerateSampleError(RuntimeError):
    """A sampling-based check hit a degenerate sample point (e.g. division by ~0)."""
