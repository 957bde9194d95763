"""The linear answer network: input assembly, prediction, row updates.

The input vector is the exact concatenation
``[previous predictions | observation features | action activations]``
(the activation segment is absent for uncontrolled systems); no bias
element is appended.  Predictions are the plain matrix-vector product
``W @ x`` with no squashing, so out-of-range transients are possible
early in learning; a non-finite check guards against divergence
instead of clamping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_length


class DivergenceError(RuntimeError):
    """Raised when a prediction or weight entry goes non-finite.

    Divergence aborts the run with context rather than being silently
    clamped, so experiments cannot mask instability.
    """

    def __init__(self, message: str, *, step: int | None = None, node: int | None = None):
        super().__init__(message)
        self.step = step
        self.node = node


@dataclass(frozen=True)
class InputLayout:
    """Fixed segment boundaries of the input vector for one configuration."""

    node_count: int
    feature_count: int
    activation_count: int = 0  # 0 encodes the uncontrolled case

    def __post_init__(self) -> None:
        if self.node_count < 1 or self.feature_count < 1 or self.activation_count < 0:
            raise ValueError(
                f"invalid layout ({self.node_count}, {self.feature_count}, {self.activation_count})"
            )

    @property
    def input_length(self) -> int:
        return self.node_count + self.feature_count + self.activation_count

    @property
    def controlled(self) -> bool:
        return self.activation_count > 0


def assemble_input(
    layout: InputLayout,
    y_prev: np.ndarray,
    feature_values: np.ndarray,
    activation_values: np.ndarray | None = None,
) -> np.ndarray:
    """Concatenate ``[y_prev, feature_values, activation_values]``.

    Lengths must match the layout exactly; the activation segment must be
    present iff the layout is controlled.
    """
    check_length(y_prev, layout.node_count, "y_prev")
    check_length(feature_values, layout.feature_count, "feature_values")
    x = np.empty(layout.input_length, dtype=np.float64)
    x[: layout.node_count] = y_prev
    x[layout.node_count : layout.node_count + layout.feature_count] = feature_values
    if layout.controlled:
        if activation_values is None:
            raise ValueError("activation_values required for a controlled layout")
        check_length(activation_values, layout.activation_count, "activation_values")
        x[layout.node_count + layout.feature_count :] = activation_values
    elif activation_values is not None:
        raise ValueError("activation_values must be absent for an uncontrolled layout")
    return x


def predict(W: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Prediction vector ``W @ x`` (identity output function)."""
    if W.ndim != 2 or x.ndim != 1 or W.shape[1] != x.shape[0]:
        raise ValueError(f"shape mismatch: W {W.shape} with x {x.shape}")
    # overflow here is detected and reported below, not warned about
    with np.errstate(over="ignore", invalid="ignore"):
        y = W @ x
    if not np.all(np.isfinite(y)):
        node = int(np.flatnonzero(~np.isfinite(y))[0])
        raise DivergenceError(f"non-finite prediction at node {node}", node=node)
    return y


def apply_row_update(W: np.ndarray, row: int, scale: float, x_stored: np.ndarray) -> None:
    """In-place ``W[row] += scale * x_stored``; all other rows untouched.

    ``scale`` is the fully composed factor the learner computes
    (step size x TD error x accumulated condition x lambda power).
    """
    if W.ndim != 2 or x_stored.shape != (W.shape[1],):
        raise ValueError(f"shape mismatch: W {W.shape} with stored input {x_stored.shape}")
    if not 0 <= row < W.shape[0]:
        raise IndexError(f"row {row} out of range for {W.shape[0]} nodes")
    with np.errstate(over="ignore", invalid="ignore"):
        W[row] += scale * x_stored
    if not np.all(np.isfinite(W[row])):
        raise DivergenceError(f"non-finite weight in node {row} after update", node=row)


def save_weights(W: np.ndarray, path) -> None:
    """Write a weight matrix as CSV: a ``rows,cols`` header, then row-major
    rows with 17 significant digits (bit-stable round trip)."""
    rows, cols = W.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{rows},{cols}\n")
        for r in range(rows):
            fh.write(",".join(f"{v:.17g}" for v in W[r]) + "\n")


def load_weights(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        if len(header) != 2:
            raise ValueError(f"malformed weight header in {path}")
        rows, cols = int(header[0]), int(header[1])
        W = np.empty((rows, cols), dtype=np.float64)
        for r in range(rows):
            values = fh.readline().strip().split(",")
            if len(values) != cols:
                raise ValueError(f"row {r} in {path} has {len(values)} values, expected {cols}")
            W[r] = [float(v) for v in values]
    return W
