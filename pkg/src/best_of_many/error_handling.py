"""Centralized error handling for the command-line workflows."""

import logging
from typing import Any, Dict, Sequence

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from best_of_many.exceptions import (  # isort: skip
    BmsError,
    InvalidFraction,
    ShapeMismatch,
)

logger = logging.getLogger(__name__)


def handle_error(error: Exception, context: str = "") -> Dict[str, Any]:
    """
    Handle errors consistently across commands.

    Args:
        error: The exception that occurred
        context: Additional context for logging

    Returns:
        Error response dictionary
    """
    logger.error(f"Error in {context}: {str(error)}", exc_info=True)

    if isinstance(error, BmsError):
        return {
            "detail": error.message,
            "exit_code": error.exit_code,
            "type": error.__class__.__name__,
            **error.details,
        }
    elif isinstance(error, PydanticValidationError):
        return {
            "detail": str(error),
            "exit_code": 2,
            "type": "ValidationError",
        }
    elif isinstance(error, (OSError, ValueError)):
        return {"detail": str(error), "exit_code": 2, "type": type(error).__name__}
    else:
        return {
            "detail": "Internal error",
            "exit_code": 1,
            "type": "InternalError",
        }


def validate_positive(name: str, value: float) -> None:
    """
    Validate that a scalar setting is strictly positive.

    Raises:
        ValueError: If value is not > 0
    """
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value}")


def validate_fraction(frac: float) -> None:
    """
    Validate a split fraction.

    Raises:
        InvalidFraction: If frac is not strictly between 0 and 1
    """
    if not 0.0 < frac < 1.0:
        raise InvalidFraction(
            f"Invalid fraction: {frac}. Expected 0 < frac < 1", {"frac": frac}
        )


def validate_same_shape(
    name: str, a: Sequence[int] | np.ndarray, b: Sequence[int] | np.ndarray
) -> None:
    """
    Validate that two shapes are equal.

    Raises:
        ShapeMismatch: If the shapes differ
    """
    shape_a = tuple(a.shape) if isinstance(a, np.ndarray) else tuple(a)
    shape_b = tuple(b.shape) if isinstance(b, np.ndarray) else tuple(b)
    if shape_a != shape_b:
        raise ShapeMismatch(
            f"{name}: shapes {shape_a} and {shape_b} differ",
            {"left": list(shape_a), "right": list(shape_b)},
        )
