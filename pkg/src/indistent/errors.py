"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input failed a structural or numerical precondition."""


class DimensionError(ValidationError):
    """Array shapes or Hilbert-space dimensions are inconsistent."""


class StatisticsError(ValidationError):
    """A state is not (anti)symmetric under the declared particle statistics."""


class SetupError(ValidationError):
    """Partition or orthogonal structure is malformed."""


class FilteredOutError(ValidationError):
    """The observable part of a state carries (numerically) zero weight."""

    def __init__(self, weight, message=None):
        self.weight = weight
        super().__init__(message or f"state is fully filtered out (weight={weight:.3e})")
