"""One-step prediction extraction and the RMSE metric.

The model's one-step prediction of feature ``f`` is read off the state
vector at the depth-1 children of ``f``.  For controlled networks the
children (one per action activation) are mixed, weighted by the
activation of the *last action taken*; the default normalizes by the
total activation so the mixture stays in the convex hull of the child
values.
"""

from __future__ import annotations

import numpy as np

from .question import QuestionNetwork, feature_child_matrix
from .validation import check_length


class FeatureValuePredictor:
    """Precomputed child lookup for repeated per-step evaluation."""

    def __init__(self, net: QuestionNetwork, normalize: bool = True) -> None:
        self.child_index = feature_child_matrix(net)
        self.controlled = net.controlled
        self.normalize = normalize
        self.activation_count = net.activation_count

    def __call__(self, y: np.ndarray, psi_values: np.ndarray | None = None) -> np.ndarray:
        if not self.controlled:
            if psi_values is not None:
                raise ValueError("psi_values must be absent for an uncontrolled network")
            return y[self.child_index[:, 0]]
        if psi_values is None:
            raise ValueError("psi_values required for a controlled network")
        check_length(psi_values, self.activation_count, "psi_values")
        mixed = y[self.child_index] @ psi_values
        if self.normalize:
            total = psi_values.sum()
            if total == 0.0:
                raise ValueError("activation values sum to zero; cannot normalize")
            return mixed / total
        return mixed


def one_step_feature_prediction(
    y: np.ndarray,
    net: QuestionNetwork,
    psi_values: np.ndarray | None = None,
    *,
    normalize: bool = True,
) -> np.ndarray:
    """Predicted next-step value of every feature function, given state ``y``.

    ``psi_values`` are the action activations of the last action taken
    (present iff the network is controlled).
    """
    return FeatureValuePredictor(net, normalize=normalize)(y, psi_values)


def rmse_step(predicted: np.ndarray, actual_features: np.ndarray) -> float:
    """Root of the feature-averaged squared prediction error for one step."""
    predicted = np.asarray(predicted, dtype=np.float64)
    actual = np.asarray(actual_features, dtype=np.float64)
    if predicted.shape != actual.shape:
        raise ValueError(f"shape mismatch: {predicted.shape} vs {actual.shape}")
    err = predicted - actual
    return float(np.sqrt(np.mean(err * err)))
