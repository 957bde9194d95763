"""Evenly tiled Gaussian radial basis function grids.

The same grid type serves two roles: feature functions over the
observation space (whose future values the network predicts) and
activation functions over the action space (which weight updates by
how closely the executed action matches each kernel's center).

A grid with ``per_dim_count`` kernels per dimension over a box in
``R^dim`` has ``per_dim_count ** dim`` kernels.  Each kernel is
spherical: its value at a point ``p`` with center ``mu`` is
``exp(-||p - mu||^2 / (2 * width))``, where ``width`` scales the
squared distance directly (a variance scale, not a standard
deviation).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .validation import as_matrix, as_point, check_positive, check_positive_int


@dataclass(frozen=True)
class BoxBounds:
    """An axis-aligned box: per-dimension lower and upper limits."""

    low: tuple[float, ...]
    high: tuple[float, ...]

    def __post_init__(self) -> None:
        low = tuple(float(v) for v in np.atleast_1d(np.asarray(self.low, dtype=np.float64)))
        high = tuple(float(v) for v in np.atleast_1d(np.asarray(self.high, dtype=np.float64)))
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)
        if len(low) != len(high) or len(low) == 0:
            raise ValueError(f"bounds must pair equal-length limit lists, got {low} / {high}")
        for k, (lo, hi) in enumerate(zip(low, high)):
            if not lo < hi:
                raise ValueError(f"bounds must satisfy low < high in dimension {k}: {lo} >= {hi}")

    @property
    def dim(self) -> int:
        return len(self.low)

    def contains(self, point: np.ndarray) -> bool:
        p = as_point(point, self.dim, "point")
        return bool(np.all(p >= self.low) and np.all(p <= self.high))

    def clip(self, point: np.ndarray) -> np.ndarray:
        return np.clip(as_point(point, self.dim, "point"), self.low, self.high)


def unit_bounds(dim: int = 1) -> BoxBounds:
    """The unit box [0, 1]^dim."""
    return BoxBounds(low=(0.0,) * dim, high=(1.0,) * dim)


@dataclass(frozen=True, eq=False)
class RbfGrid:
    """An immutable set of spherical Gaussian kernels tiled over a box.

    Construct with :func:`make_grid`; evaluation is thread-safe.
    """

    centers: np.ndarray  # (n_kernels, dim), row per kernel
    width: float
    bounds: BoxBounds
    per_dim_count: int
    _scale: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_scale", -0.5 / self.width)
        self.centers.setflags(write=False)

    def __len__(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def evaluate(self, point) -> np.ndarray:
        """Kernel values at one point: element i is exp(-||p - mu_i||^2 / (2 width)).

        Points outside the grid's bounds are evaluated normally; noise may
        push observations out of the box and the model still needs input.
        """
        p = as_point(point, self.dim, "point")
        diff = self.centers - p
        sq = np.einsum("ij,ij->i", diff, diff)
        return np.exp(sq * self._scale)

    def transform(self, X) -> np.ndarray:
        """Batch evaluation: rows of ``X`` are points, rows out are activations."""
        pts = as_matrix(X, "X", n_cols=self.dim)
        diff = pts[:, None, :] - self.centers[None, :, :]
        sq = np.einsum("tij,tij->ti", diff, diff)
        return np.exp(sq * self._scale)

    def __call__(self, point) -> np.ndarray:
        return self.evaluate(point)


def make_grid(bounds: BoxBounds, per_dim_count: int, width: float) -> RbfGrid:
    """Tile ``per_dim_count ** bounds.dim`` kernels evenly over the box.

    Per-dimension coordinates are linearly spaced *including both
    endpoints*, so ``per_dim_count=4`` on [0, 1] places centers at
    {0, 1/3, 2/3, 1}.  A single kernel per dimension degenerates to the
    lower bound.
    """
    if not isinstance(bounds, BoxBounds):
        raise TypeError(f"bounds must be BoxBounds, got {type(bounds).__name__}")
    check_positive_int(per_dim_count, "per_dim_count")
    check_positive(width, "width")
    axes: list[np.ndarray] = [
        np.linspace(lo, hi, per_dim_count) for lo, hi in zip(bounds.low, bounds.high)
    ]
    centers = np.array(list(product(*axes)), dtype=np.float64).reshape(
        per_dim_count**bounds.dim, bounds.dim
    )
    return RbfGrid(centers=centers, width=float(width), bounds=bounds, per_dim_count=per_dim_count)


def indicator_map(symbols: Sequence[float] | np.ndarray):
    """One-hot feature map over a finite symbol set, for discrete test worlds.

    Returns an object with the same evaluate/len surface as
    :class:`RbfGrid`: element i is 1.0 when the (scalar) point rounds to
    ``symbols[i]`` and 0.0 otherwise.
    """
    return _IndicatorMap(np.asarray(symbols, dtype=np.float64))


class _IndicatorMap:
    def __init__(self, symbols: np.ndarray) -> None:
        if symbols.ndim != 1 or symbols.size == 0:
            raise ValueError("symbols must be a non-empty 1-D sequence")
        self.symbols = symbols
        self.dim = 1

    def __len__(self) -> int:
        return self.symbols.size

    def evaluate(self, point) -> np.ndarray:
        p = as_point(point, 1, "point")
        return (np.abs(self.symbols - p[0]) < 0.5).astype(np.float64)

    def __call__(self, point) -> np.ndarray:
        return self.evaluate(point)
