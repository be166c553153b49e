"""Input validation helpers.

Small check functions used at every public entry point so that bad inputs
fail with :class:`~frictionlab.errors.InvalidInputError` instead of
propagating NaNs into simulations or optimizers.
"""

import math

import numpy as np

from frictionlab.errors import InvalidInputError


def check_finite(**named) -> None:
    """Raise unless every named scalar is a finite real number."""
    for name, value in named.items():
        try:
            ok = math.isfinite(value)
        except TypeError as exc:
            raise InvalidInputError(f"{name} must be a real number, got {value!r}") from exc
        if not ok:
            raise InvalidInputError(f"{name} must be finite, got {value!r}")


def check_positive(**named) -> None:
    """Raise unless every named scalar is finite and strictly positive."""
    check_finite(**named)
    for name, value in named.items():
        if not value > 0:
            raise InvalidInputError(f"{name} must be > 0, got {value!r}")


def check_non_negative(**named) -> None:
    """Raise unless every named scalar is finite and >= 0."""
    check_finite(**named)
    for name, value in named.items():
        if not value >= 0:
            raise InvalidInputError(f"{name} must be >= 0, got {value!r}")


def check_array_finite(name: str, arr: np.ndarray) -> None:
    """Raise unless every element of ``arr`` is finite."""
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")


def check_range(name: str, value, lo, hi) -> None:
    """Raise unless ``lo <= value <= hi``."""
    check_finite(**{name: value})
    if value < lo or value > hi:
        raise InvalidInputError(f"{name} must lie in [{lo}, {hi}], got {value!r}")
