"""Input validation helpers shared across the package."""

from __future__ import annotations

import math

import numpy as np

from .errors import DataError


def check_embedding(values, dim: int | None = None) -> np.ndarray:
    """Coerce ``values`` to a 1-D float64 vector and validate it.

    Raises DataError if the result is empty, not one-dimensional, contains
    non-finite values, or does not match an expected ``dim``.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DataError("embedding must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise DataError("embedding contains non-finite values")
    if dim is not None and arr.size != dim:
        raise DataError(f"dimension mismatch: expected {dim}, got {arr.size}")
    return arr


def check_unit_interval(value: float, name: str) -> float:
    """Validate a scalar lies in [0, 1]; returns it as a float."""
    value = float(value)
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_thresholds(tau_lo: float, tau_hi: float) -> tuple[float, float]:
    """Validate a (tau_lo, tau_hi) threshold pair: 0 <= tau_lo <= tau_hi <= 1."""
    tau_lo, tau_hi = float(tau_lo), float(tau_hi)
    if not (0.0 <= tau_lo <= tau_hi <= 1.0):
        raise ValueError(
            f"thresholds must satisfy 0 <= tau_lo <= tau_hi <= 1, "
            f"got tau_lo={tau_lo}, tau_hi={tau_hi}"
        )
    return tau_lo, tau_hi
