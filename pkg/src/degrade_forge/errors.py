"""Exception types shared across the toolkit."""


class DegradeForgeError(Exception):
    """Base class for all toolkit errors."""


class RangeViolation(DegradeForgeError, ValueError):
    """A degradation field lies outside the range its level permits."""

    def __init__(self, field: str, value, lo, hi):
        self.field = field
        self.value = value
        super().__init__(f"{field}={value!r} outside allowed range [{lo}, {hi}]")


class InvalidVector(DegradeForgeError, ValueError):
    """A degradation vector is malformed (wrong length, non-finite entries)."""


class DomainError(DegradeForgeError, ValueError):
    """A numeric argument violates an operation's domain."""


class DimensionError(DegradeForgeError, ValueError):
    """Image/kernel dimensions are incompatible with the operation."""


class ShapeMismatch(DegradeForgeError, ValueError):
    """Named tensors disagree in shape or are missing."""


class NumericFault(DegradeForgeError, ArithmeticError):
    """A forward pass produced non-finite intermediates."""


class CorruptWeights(DegradeForgeError, ValueError):
    """A weight file failed checksum or structural validation."""
