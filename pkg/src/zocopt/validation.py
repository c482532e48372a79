"""Small input-validation helpers shared by the public API."""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionError


def as_vector(x, dim: int | None = None, name: str = "x") -> np.ndarray:
    """Return ``x`` as a 1-D float64 array, checking its length.

    Raises :class:`DimensionError` if ``x`` is not one-dimensional or its
    length differs from ``dim`` (when given).
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(f"{name} has length {arr.shape[0]}, expected {dim}")
    return arr


def check_positive(value, name: str) -> float:
    value = float(value)
    if not value > 0 or not np.isfinite(value):
        raise ValueError(f"{name} must be a positive finite number, got {value}")
    return value


def check_positive_int(value, name: str) -> int:
    ivalue = int(value)
    if ivalue != value or ivalue < 1:
        raise ValueError(f"{name} must be a positive integer, got {value}")
    return ivalue


def check_unit_vector(u, name: str = "u", tol: float = 1e-9) -> np.ndarray:
    u = as_vector(u, name=name)
    norm = float(np.linalg.norm(u))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"{name} must have unit norm, got {norm!r}")
    return u
