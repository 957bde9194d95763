"""Scikit-learn style estimator wrapping the online learner.

``fit`` consumes a trajectory laid out one step per row (observation
columns first, then action columns for controlled setups) and learns
the weight matrix online.  ``transform`` replays new trajectories
through the *frozen* weights, returning the predictive-state vector per
step; ``predict`` returns the model's one-step-ahead feature values,
aligned so row t is the prediction of row t's own features from the
state before it.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .answer import assemble_input, predict as answer_predict
from .basis import BoxBounds, make_grid
from .evaluation import FeatureValuePredictor
from .learner import TDNetworkLearner
from .question import build_chain_network


class ContinuousTDNetwork(TransformerMixin, BaseEstimator):
    """Predictive-state model learner with the estimator interface.

    Parameters mirror the experiment configuration: grid shape
    (``n``/``sigma_phi`` over the observation box, ``m``/``sigma_psi``
    over the action box), ``chain_depth``, and the learning constants.
    Omitting the action bounds selects the uncontrolled variant.
    """

    def __init__(
        self,
        obs_low=0.0,
        obs_high=1.0,
        n=4,
        sigma_phi=0.3,
        action_low=None,
        action_high=None,
        m=4,
        sigma_psi=0.1,
        chain_depth=5,
        alpha=0.01,
        lam=1.0,
        normalize_eval=True,
    ):
        self.obs_low = obs_low
        self.obs_high = obs_high
        self.n = n
        self.sigma_phi = sigma_phi
        self.action_low = action_low
        self.action_high = action_high
        self.m = m
        self.sigma_psi = sigma_psi
        self.chain_depth = chain_depth
        self.alpha = alpha
        self.lam = lam
        self.normalize_eval = normalize_eval

    # -- construction -------------------------------------------------------

    @property
    def _controlled(self) -> bool:
        return self.action_low is not None or self.action_high is not None

    def _build(self) -> None:
        obs_bounds = BoxBounds(np.atleast_1d(self.obs_low), np.atleast_1d(self.obs_high))
        self.feature_map_ = make_grid(obs_bounds, self.n, self.sigma_phi)
        if self._controlled:
            if self.action_low is None or self.action_high is None:
                raise ValueError("action_low and action_high must be given together")
            action_bounds = BoxBounds(
                np.atleast_1d(self.action_low), np.atleast_1d(self.action_high)
            )
            self.activation_map_ = make_grid(action_bounds, self.m, self.sigma_psi)
            activation_count = len(self.activation_map_)
        else:
            self.activation_map_ = None
            activation_count = 0
        self.network_ = build_chain_network(
            len(self.feature_map_), activation_count, self.chain_depth
        )
        self.learner_ = TDNetworkLearner(
            self.network_,
            self.feature_map_,
            self.activation_map_,
            alpha=self.alpha,
            lam=self.lam,
            eval_normalize=self.normalize_eval,
        )
        self._obs_dim = self.feature_map_.dim
        self._action_dim = self.activation_map_.dim if self._controlled else 0

    def _check_columns(self, X: np.ndarray) -> np.ndarray:
        X = check_array(X, dtype=np.float64)
        expected = self._obs_dim + self._action_dim
        if X.shape[1] != expected:
            raise ValueError(
                f"X has {X.shape[1]} columns, expected {expected} "
                f"({self._obs_dim} observation + {self._action_dim} action)"
            )
        return X

    def _split_row(self, row: np.ndarray):
        obs = row[: self._obs_dim]
        action = row[self._obs_dim :] if self._controlled else None
        return obs, action

    # -- the estimator surface ----------------------------------------------

    def fit(self, X, y=None):
        """Learn online over the trajectory ``X`` from scratch."""
        self._build()
        X = self._check_columns(X)
        self.n_features_in_ = X.shape[1]
        for row in X:
            obs, action = self._split_row(row)
            self.learner_.step(obs, action)
        self.W_ = self.learner_.W
        return self

    def partial_fit(self, X, y=None):
        """Continue learning without resetting weights or traces."""
        if not hasattr(self, "learner_"):
            return self.fit(X, y)
        X = self._check_columns(X)
        for row in X:
            obs, action = self._split_row(row)
            self.learner_.step(obs, action)
        self.W_ = self.learner_.W
        return self

    def transform(self, X) -> np.ndarray:
        """Predictive-state vector per step, weights frozen.

        Each call starts from the zero state and filters the given
        trajectory; no learning happens.
        """
        check_is_fitted(self, "W_")
        X = self._check_columns(X)
        layout = self.learner_.layout
        y_prev = np.zeros(layout.node_count, dtype=np.float64)
        states = np.empty((X.shape[0], layout.node_count), dtype=np.float64)
        for t, row in enumerate(X):
            obs, action = self._split_row(row)
            features = self.feature_map_.evaluate(obs)
            psi = self.activation_map_.evaluate(action) if self._controlled else None
            x = assemble_input(layout, y_prev, features, psi)
            y_prev = answer_predict(self.W_, x)
            states[t] = y_prev
        return states

    def predict(self, X) -> np.ndarray:
        """One-step-ahead feature values: row t predicts row t's features
        from the state accumulated before it (and row t's own action)."""
        check_is_fitted(self, "W_")
        X = self._check_columns(X)
        layout = self.learner_.layout
        extractor = FeatureValuePredictor(self.network_, normalize=self.normalize_eval)
        y_prev = np.zeros(layout.node_count, dtype=np.float64)
        out = np.empty((X.shape[0], len(self.feature_map_)), dtype=np.float64)
        for t, row in enumerate(X):
            obs, action = self._split_row(row)
            features = self.feature_map_.evaluate(obs)
            psi = self.activation_map_.evaluate(action) if self._controlled else None
            out[t] = extractor(y_prev, psi)
            x = assemble_input(layout, y_prev, features, psi)
            y_prev = answer_predict(self.W_, x)
        return out
