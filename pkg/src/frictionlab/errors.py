"""Exception types shared across the package."""


class FrictionLabError(Exception):
    """Base class for all frictionlab errors."""


class InvalidInputError(FrictionLabError, ValueError):
    """An argument is non-finite, out of range, or structurally malformed."""


class ConstraintViolationError(FrictionLabError, ValueError):
    """A candidate parameter vector violates its feasibility constraints."""


class IdentificationFailureError(FrictionLabError, RuntimeError):
    """Every optimizer start diverged; no finite objective was found."""


class TrainingDivergenceError(FrictionLabError, RuntimeError):
    """Training produced a non-finite loss. Carries the offending epoch."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch
