"""The online TD(lambda) network learning loop.

Each step: assemble the input vector from the previous state, the new
observation's feature values and the last action's activation values;
compute the new state ``y = W @ x``; then let every live eligibility
trace pull one weight-row update toward its current target before
spawning a fresh trace per node.

A trace born at step ``k`` for node ``i`` is updated once per step while
its parent walk stays inside the network (``depth(i)`` updates in
total) and dies when the walk reaches the observation feature.  Its stored
input ``x_k`` is the gradient of the (linear) prediction it was born
from; its accumulated action condition starts at 1 and is multiplied by
the per-step activation of the chain's condition function, so updates
are weighted by how closely the executed actions matched the actions
the prediction was about.  Traces whose condition has decayed to zero
are retained by default: their updates are exact no-ops and their
lifetime bookkeeping stays uniform.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .answer import DivergenceError, InputLayout, assemble_input
from .answer import predict as answer_predict
from .evaluation import FeatureValuePredictor
from .question import NodePred, QuestionNetwork
from .validation import check_non_negative, check_unit_interval


@dataclass(frozen=True)
class Trace(object):
    """One live eligibility record (a read-only view for instrumentation).

    ``stored_input`` is shared with every trace born at the same step.
    """

    node: int
    birth: int
    stored_input: np.ndarray
    accumulated_condition: float


@dataclass(frozen=True)
class TraceUpdateEvent:
    """Everything one trace contributed to one step's weight update."""

    node: int
    birth: int
    age: int
    target: float
    prior: float
    condition: float
    scale: float
    stored_input: np.ndarray


@dataclass(frozen=True)
class StepDiagnostics:
    feature_predictions: np.ndarray  # one-step predicted feature values (pre-update state)
    trace_count: int
    max_abs_weight: float


class _Cohort:
    """All traces born at one step: shared stored input, per-node conditions."""

    __slots__ = ("birth", "stored_input", "condition")

    def __init__(self, birth: int, stored_input: np.ndarray, node_count: int):
        self.birth = birth
        self.stored_input = stored_input
        self.condition = np.ones(node_count, dtype=np.float64)


class TDNetworkLearner:
    """Incremental TD(lambda) network learner over continuous streams.

    Parameters
    ----------
    network : the question network defining targets and conditions.
    feature_map : feature functions over observations (e.g. an RbfGrid).
    activation_map : activation functions over actions; required iff the
        network is controlled.
    alpha : step size.
    lam : eligibility parameter in [0, 1]; ``lam**0 == 1`` even at 0, so
        ``lam=0`` reduces to one-step TD.
    eval_normalize : whether diagnostic feature predictions use the
        normalized (weighted-mean) child mixture.
    prune_threshold : optional condition level below which a trace's
        accumulated condition is forced to zero and the trace no longer
        counts as live.  Updates from such traces are exact no-ops either
        way; the knob only trims bookkeeping.  Default: keep everything.
    update_listener : optional callable receiving a TraceUpdateEvent per
        trace update (instrumentation; adds per-trace Python overhead).
    """

    def __init__(
        self,
        network: QuestionNetwork,
        feature_map,
        activation_map=None,
        *,
        alpha: float = 0.01,
        lam: float = 1.0,
        eval_normalize: bool = True,
        prune_threshold: float | None = None,
        update_listener: Callable[[TraceUpdateEvent], None] | None = None,
    ) -> None:
        if len(feature_map) != network.feature_count:
            raise ValueError(
                f"feature map size {len(feature_map)} != network feature count "
                f"{network.feature_count}"
            )
        if network.controlled:
            if activation_map is None:
                raise ValueError("controlled network requires an activation map")
            if len(activation_map) != network.activation_count:
                raise ValueError(
                    f"activation map size {len(activation_map)} != network activation count "
                    f"{network.activation_count}"
                )
        elif activation_map is not None:
            raise ValueError("uncontrolled network must not have an activation map")
        check_non_negative(alpha, "alpha")
        check_unit_interval(lam, "lam")
        if prune_threshold is not None:
            check_non_negative(prune_threshold, "prune_threshold")

        self.network = network
        self.feature_map = feature_map
        self.activation_map = activation_map
        self.alpha = float(alpha)
        self.lam = float(lam)
        self.prune_threshold = prune_threshold
        self.update_listener = update_listener
        self.layout = InputLayout(
            node_count=len(network),
            feature_count=network.feature_count,
            activation_count=network.activation_count,
        )
        self._feature_predictor = FeatureValuePredictor(network, normalize=eval_normalize)
        self._precompute_age_tables()
        self.reset()

    # -- construction-time tables ------------------------------------------

    def _precompute_age_tables(self) -> None:
        net = self.network
        n = len(net)
        depths = np.array([net.nodes[i].depth for i in range(n)], dtype=np.int64)
        self._depths = depths
        self.max_depth = int(depths.max())

        # Per age a (1-based), arrays over that age's cohort members, with
        # surviving members (depth > a) listed before dying ones (depth == a):
        #   rows: node ids;  target: index into [y | features] concatenation;
        #   prior: node id of the (a-1)-th parent;  cond: condition index.
        self._rows: list[np.ndarray] = [np.empty(0, dtype=np.int64)]
        self._target: list[np.ndarray] = [np.empty(0, dtype=np.int64)]
        self._prior: list[np.ndarray] = [np.empty(0, dtype=np.int64)]
        self._cond: list[np.ndarray] = [np.empty(0, dtype=np.int64)]
        self._survivor_count: list[int] = [0]
        for a in range(1, self.max_depth + 1):
            deeper = [i for i in range(n) if depths[i] > a]
            exact = [i for i in range(n) if depths[i] == a]
            rows = deeper + exact
            target = []
            prior = []
            cond = []
            for i in rows:
                above = net.kth_parent(i, a)
                if isinstance(above, NodePred):
                    target.append(above.index)
                else:
                    target.append(n + above.index)  # feature segment of [y | features]
                prior_node = net.kth_parent(i, a - 1)
                assert isinstance(prior_node, NodePred)
                prior.append(prior_node.index)
                c = net.nodes[prior_node.index].condition
                cond.append(-1 if c is None else c)
            self._rows.append(np.array(rows, dtype=np.int64))
            self._target.append(np.array(target, dtype=np.int64))
            self._prior.append(np.array(prior, dtype=np.int64))
            self._cond.append(np.array(cond, dtype=np.int64))
            self._survivor_count.append(len(deeper))
        self._live_count = [0] + [len(r) for r in self._rows[1:]]
        # alpha * lam^(a-1), with lam**0 == 1 for every lam including 0.
        self._alpha_lam = [0.0] + [self.alpha * self.lam ** (a - 1) for a in range(1, self.max_depth + 1)]

    # -- lifecycle -----------------------------------------------------------

    def reset(self) -> None:
        """Zeroed weights and state, empty trace set, step counter at 0."""
        self.W = np.zeros((self.layout.node_count, self.layout.input_length), dtype=np.float64)
        self.y_prev = np.zeros(self.layout.node_count, dtype=np.float64)
        self.t = 0
        self._cohorts: deque[_Cohort] = deque()

    @property
    def trace_count(self) -> int:
        total = 0
        for cohort in self._cohorts:
            age = min(self.t - cohort.birth, self.max_depth)
            if self.prune_threshold is None:
                total += self._live_count[age]
            else:
                total += int(np.count_nonzero(cohort.condition[self._rows[age]] > 0.0))
        return total

    def iter_traces(self) -> Iterator[Trace]:
        """Live traces, oldest cohort first, node-major within a cohort."""
        for cohort in self._cohorts:
            age = min(self.t - cohort.birth, self.max_depth)
            for i in self._rows[age]:
                c = float(cohort.condition[i])
                if self.prune_threshold is not None and c == 0.0:
                    continue
                yield Trace(
                    node=int(i),
                    birth=cohort.birth,
                    stored_input=cohort.stored_input,
                    accumulated_condition=c,
                )

    # -- the learning step ----------------------------------------------------

    def step(self, observation, action=None) -> tuple[np.ndarray, StepDiagnostics]:
        """Advance one time step: ``action`` is the action the environment
        just consumed to produce ``observation`` (None iff uncontrolled).

        Returns the new prediction vector and per-step diagnostics.
        Raises DivergenceError (with step and node context) if any
        prediction or weight goes non-finite.
        """
        controlled = self.layout.controlled
        if controlled and action is None:
            raise ValueError("controlled learner requires an action each step")
        if not controlled and action is not None:
            raise ValueError("uncontrolled learner must not receive actions")

        features = self.feature_map.evaluate(observation)
        psi_values = self.activation_map.evaluate(action) if controlled else None

        feature_predictions = self._feature_predictor(self.y_prev, psi_values)

        x = assemble_input(self.layout, self.y_prev, features, psi_values)
        try:
            y = answer_predict(self.W, x)
        except DivergenceError as err:
            raise DivergenceError(
                f"prediction diverged at step {self.t}, node {err.node}",
                step=self.t,
                node=err.node,
            ) from err

        # Single lookup vector [y | features]: targets of deeper traces read
        # predictions, targets of dying traces read realized feature values.
        lookup = np.concatenate((y, features))

        # Overflow inside a cohort update is caught by the finite check
        # below and reported as divergence; suppress the interim warnings.
        with np.errstate(over="ignore", invalid="ignore"):
            for cohort in self._cohorts:
                age = self.t - cohort.birth
                rows = self._rows[age]
                z = lookup[self._target[age]]
                prior = self.y_prev[self._prior[age]]
                cond = cohort.condition[rows]
                if controlled:
                    cond = cond * psi_values[self._cond[age]]
                scale = (z - prior) * cond
                scale *= self._alpha_lam[age]
                self.W[rows] += np.outer(scale, cohort.stored_input)
                if self.update_listener is not None:
                    self._emit_events(cohort, age, rows, z, prior, cond, scale)
                survivors = self._survivor_count[age]
                surviving_cond = cond[:survivors]
                if self.prune_threshold is not None:
                    surviving_cond = np.where(
                        surviving_cond < self.prune_threshold, 0.0, surviving_cond
                    )
                cohort.condition[rows[:survivors]] = surviving_cond

        if self._cohorts and self.t - self._cohorts[0].birth == self.max_depth:
            self._cohorts.popleft()

        max_abs_weight = float(np.abs(self.W).max())
        if not np.isfinite(max_abs_weight):
            bad = np.flatnonzero(~np.all(np.isfinite(self.W), axis=1))
            node = int(bad[0]) if bad.size else None
            raise DivergenceError(
                f"weights diverged at step {self.t}, node {node}", step=self.t, node=node
            )

        self._cohorts.append(_Cohort(self.t, x, self.layout.node_count))
        self.y_prev = y
        self.t += 1

        diag = StepDiagnostics(
            feature_predictions=feature_predictions,
            trace_count=self.trace_count,
            max_abs_weight=max_abs_weight,
        )
        return y, diag

    def _emit_events(self, cohort, age, rows, z, prior, cond, scale) -> None:
        for pos in range(rows.shape[0]):
            if self.prune_threshold is not None and cohort.condition[rows[pos]] == 0.0:
                continue
            self.update_listener(
                TraceUpdateEvent(
                    node=int(rows[pos]),
                    birth=cohort.birth,
                    age=age,
                    target=float(z[pos]),
                    prior=float(prior[pos]),
                    condition=float(cond[pos]),
                    scale=float(scale[pos]),
                    stored_input=cohort.stored_input,
                )
            )

    # -- persistence ------------------------------------------------------------

    def save_checkpoint(self, path) -> None:
        """Persist (W, y_prev, t).  Traces are deliberately excluded: a
        resumed learner starts with an empty trace set."""
        np.savez(path, W=self.W, y_prev=self.y_prev, t=np.int64(self.t))

    def load_checkpoint(self, path) -> None:
        with np.load(path) as data:
            W = data["W"]
            y_prev = data["y_prev"]
            t = int(data["t"])
        if W.shape != self.W.shape or y_prev.shape != self.y_prev.shape:
            raise ValueError(
                f"checkpoint shapes {W.shape}/{y_prev.shape} do not match learner "
                f"{self.W.shape}/{self.y_prev.shape}"
            )
        self.W = W.astype(np.float64)
        self.y_prev = y_prev.astype(np.float64)
        self.t = t
        self._cohorts = deque()
