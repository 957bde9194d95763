"""Input validation helpers shared across the package.

Small, sklearn-flavored checks that turn malformed user input into
clear ``ValueError`` messages instead of numpy broadcasting surprises.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def as_point(x: float | Sequence[float] | np.ndarray, dim: int, name: str) -> np.ndarray:
    """Coerce ``x`` to a 1-D float64 vector of length ``dim``.

    Scalars are accepted for one-dimensional spaces.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.shape[0] != dim:
        raise ValueError(f"{name} must be a point of dimension {dim}, got shape {arr.shape}")
    return arr


def as_matrix(x, name: str, n_cols: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a 2-D float64 array; 1-D input becomes a column."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 1-D or 2-D array, got shape {arr.shape}")
    if n_cols is not None and arr.shape[1] != n_cols:
        raise ValueError(f"{name} must have {n_cols} columns, got {arr.shape[1]}")
    return arr


def check_length(values: np.ndarray, expected: int, name: str) -> np.ndarray:
    if values.shape != (expected,):
        raise ValueError(f"{name} must have length {expected}, got shape {values.shape}")
    return values


def check_positive(value: float, name: str) -> float:
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return value


def check_positive_int(value: int, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_non_negative(value: float, name: str) -> float:
    if not value >= 0:
        raise ValueError(f"{name} must be non-negative, got {value!r}")
    return value


def check_unit_interval(value: float, name: str) -> float:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def check_index(value: int, size: int, name: str) -> int:
    if not 0 <= value < size:
        raise IndexError(f"{name} must lie in [0, {size}), got {value!r}")
    return int(value)


def ensure_finite(arr: np.ndarray, name: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr
