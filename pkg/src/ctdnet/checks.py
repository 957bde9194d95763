"""Executable validation suites: traces, oracle, gradients, systems.

Each suite returns a list of failure messages (empty means pass) so the
command line can report them and tests can assert on them.  The oracle
suite contains a deliberately independent, per-trace implementation of
the *discrete* TD(lambda) network (binary action conditions, mismatch
kills a trace) coded directly from first principles; on a symbolic
cycle world with one-hot feature and activation functions it must agree
with the continuous learner to near machine precision, because a
one-hot activation of zero makes the continuous trace's accumulated
condition zero, which is behaviorally identical to killing it.
"""

from __future__ import annotations

import math

import numpy as np

from .answer import predict
from .basis import indicator_map, make_grid
from .learner import TDNetworkLearner
from .question import build_chain_network
from .systems import (
    ControlledSineWave,
    ControlledSquareWave,
    MountainCarPO,
    RandomWalkPolicy,
    SineWave,
    SquareWave,
    make_system,
)


# -- the independent discrete oracle -------------------------------------------


class DiscreteChainOracle:
    """Discrete TD(lambda) network on symbol chains, coded per-trace.

    One chain of ``depth`` nodes per (observation symbol, action symbol)
    pair.  A trace stores its birth input; at each step it either dies
    (the action taken differs from its link's required action) or pulls
    its node's weight row toward the chain's next value.  No code is
    shared with the vectorized learner.
    """

    def __init__(self, n_symbols: int, n_actions: int, depth: int, alpha: float, lam: float):
        self.n_symbols = n_symbols
        self.n_actions = n_actions
        self.depth = depth
        self.alpha = alpha
        self.lam = lam
        parent: list[int] = []  # parent node id, or -1 when the parent is a feature
        feature: list[int] = []  # observation symbol the chain is rooted at
        action: list[int] = []  # required action symbol on every link of the chain
        for f in range(n_symbols):
            for a in range(n_actions):
                for k in range(depth):
                    parent.append(len(parent) - 1 if k > 0 else -1)
                    feature.append(f)
                    action.append(a)
        self.parent = parent
        self.feature = feature
        self.action = action
        n = len(parent)
        self.W = np.zeros((n, n + n_symbols + n_actions), dtype=np.float64)
        self.y_prev = np.zeros(n, dtype=np.float64)
        self.t = 0
        self.traces: list[tuple[int, int, np.ndarray]] = []  # (node, birth, stored input)

    def _ancestor(self, node: int, k: int) -> int:
        """Walk k parent links; returns a node id, or -1 for the feature."""
        for _ in range(k):
            node = self.parent[node]
            if node < 0:
                raise AssertionError("walked past the chain root")
        return node

    def step(self, obs_symbol: int, action_symbol: int) -> np.ndarray:
        phi = np.zeros(self.n_symbols)
        phi[obs_symbol] = 1.0
        psi = np.zeros(self.n_actions)
        psi[action_symbol] = 1.0
        x = np.concatenate((self.y_prev, phi, psi))
        y = self.W @ x

        survivors: list[tuple[int, int, np.ndarray]] = []
        for node, birth, x_k in self.traces:
            age = self.t - birth
            prior_node = self._ancestor(node, age - 1)
            if action_symbol != self.action[prior_node]:
                continue  # condition mismatch: the trace dies without updating
            target_node = self.parent[prior_node]
            if target_node >= 0:
                z = y[target_node]
            else:
                z = phi[self.feature[prior_node]]
            p = self.y_prev[prior_node]
            self.W[node] += self.alpha * (z - p) * self.lam ** (age - 1) * x_k
            if target_node >= 0:
                survivors.append((node, birth, x_k))
        self.traces = survivors + [(i, self.t, x) for i in range(len(self.parent))]
        self.y_prev = y
        self.t += 1
        return y


def suite_oracle(steps: int = 200, depth: int = 4, alpha: float = 0.05,
                 lam: float = 0.9, seed: int = 7, tol: float = 1e-12) -> list[str]:
    """Continuous learner vs discrete oracle on a 5-state cycle world."""
    n_symbols, n_actions = 5, 2
    oracle = DiscreteChainOracle(n_symbols, n_actions, depth, alpha, lam)
    net = build_chain_network(n_symbols, n_actions, depth)
    learner = TDNetworkLearner(
        net,
        indicator_map(range(n_symbols)),
        indicator_map(range(n_actions)),
        alpha=alpha,
        lam=lam,
    )
    rng = np.random.default_rng(seed)
    failures: list[str] = []
    state = 0
    for t in range(steps):
        a = int(rng.integers(0, n_actions))
        state = (state + a) % n_symbols  # action 1 advances the cycle, 0 holds
        oracle.step(state, a)
        learner.step(np.array([float(state)]), np.array([float(a)]))
        gap = float(np.max(np.abs(learner.W - oracle.W)))
        if gap > tol:
            failures.append(f"step {t}: weight gap {gap:.3e} exceeds {tol:.1e}")
            break
    return failures


# -- gradient suite -------------------------------------------------------------


def suite_gradients(instances: int = 100, seed: int = 3, rel_tol: float = 1e-6) -> list[str]:
    """Central finite differences of the prediction vs the stored input.

    For the linear model the derivative of output i with respect to
    weight (i, j) is exactly the input component j.  Inputs are drawn
    with magnitudes bounded away from zero so the relative comparison is
    meaningful.
    """
    rng = np.random.default_rng(seed)
    h = 1e-6
    failures: list[str] = []
    for k in range(instances):
        rows = int(rng.integers(2, 7))
        cols = int(rng.integers(2, 10))
        W = rng.normal(size=(rows, cols))
        x = rng.uniform(0.05, 1.5, size=cols) * rng.choice((-1.0, 1.0), size=cols)
        for i in range(rows):
            for j in range(cols):
                W[i, j] += h
                y_plus = predict(W, x)[i]
                W[i, j] -= 2 * h
                y_minus = predict(W, x)[i]
                W[i, j] += h
                fd = (y_plus - y_minus) / (2 * h)
                rel = abs(fd - x[j]) / abs(x[j])
                if rel > rel_tol:
                    failures.append(
                        f"instance {k} ({i},{j}): fd {fd:.12g} vs {x[j]:.12g}, rel {rel:.3e}"
                    )
        if failures:
            break
    return failures


# -- trace suite ----------------------------------------------------------------


def suite_traces(steps: int = 1000, seed: int = 11, tol: float = 1e-12) -> list[str]:
    """Instrumented controlled run checking trace lifetimes and conditions.

    Every trace must be updated exactly depth(node) times; the condition
    reported at its age-a update must equal the product of its chain's
    activation values at each update step; the live count never exceeds
    node_count * chain_depth.
    """
    n, m, depth_cfg = 2, 2, 5
    events = []
    system = make_system("square-ctl", np.random.default_rng(seed))
    phi = make_grid(system.spec.obs_bounds, n, 0.3)
    psi = make_grid(system.spec.action_bounds, m, 0.1)
    net = build_chain_network(len(phi), len(psi), depth_cfg)
    learner = TDNetworkLearner(
        net, phi, psi, alpha=0.01, lam=1.0, update_listener=events.append
    )
    policy = RandomWalkPolicy(np.random.default_rng(seed + 1), system.spec.action_bounds)

    failures: list[str] = []
    actions: list[np.ndarray] = []
    node_count = len(net)
    for t in range(steps):
        action = policy.step()
        actions.append(action)
        obs = system.step(action)
        _, diag = learner.step(obs, action)
        if diag.trace_count > node_count * depth_cfg:
            failures.append(
                f"step {t}: trace count {diag.trace_count} exceeds "
                f"{node_count * depth_cfg}"
            )

    psi_log = [psi.evaluate(a) for a in actions]
    counts: dict[tuple[int, int], int] = {}
    for ev in events:
        counts[(ev.node, ev.birth)] = counts.get((ev.node, ev.birth), 0) + 1
        expected = 1.0
        cond_index = net.nodes[ev.node].condition
        for s in range(ev.birth + 1, ev.birth + ev.age + 1):
            expected *= float(psi_log[s][cond_index])
        if abs(ev.condition - expected) > tol:
            failures.append(
                f"trace ({ev.node},{ev.birth}) age {ev.age}: condition "
                f"{ev.condition:.17g} vs running product {expected:.17g}"
            )
    for (node, birth), count in counts.items():
        expected_life = net.depth(node)
        if birth + expected_life < steps and count != expected_life:
            failures.append(
                f"trace ({node},{birth}): {count} updates, expected {expected_life}"
            )
        if count > expected_life:
            failures.append(
                f"trace ({node},{birth}): {count} updates exceed depth {expected_life}"
            )
    return failures[:20]


# -- system suite -----------------------------------------------------------------


def suite_systems(seed: int = 5) -> list[str]:
    failures: list[str] = []

    # the hand-computed mountain car step from the start state
    position, velocity = MountainCarPO.dynamics(-0.5, 0.0, 0.0)
    if abs(velocity - (-1.7684300416925727e-04)) > 1e-9:
        failures.append(f"mountain car hand step: velocity {velocity!r}")
    if abs(position - (-0.50017684300416927)) > 1e-9:
        failures.append(f"mountain car hand step: position {position!r}")

    # wave closed forms, exactly, with noise disabled
    rng = np.random.default_rng(seed)
    square = SquareWave(rng, noise_std=0.0)
    for t in range(30):
        expected = 1.0 if (t % 10) >= 5 else 0.0
        got = float(square.step()[0])
        if got != expected:
            failures.append(f"square wave t={t}: {got} != {expected}")
    sine = SineWave(rng, noise_std=0.0)
    for t in range(30):
        expected = (math.sin(0.5 * t) + 1.0) / 2.0
        got = float(sine.step()[0])
        if got != expected:
            failures.append(f"sine wave t={t}: {got} != {expected}")

    # controlled waves reduce to the uncontrolled forms at a=1, constants at a=0
    for t in range(30):
        hi = ControlledSquareWave.clean(t, 1.0)
        if hi != SquareWave.clean(t):
            failures.append(f"controlled square a=1 t={t}: {hi}")
        if ControlledSquareWave.clean(t, 0.0) != 0.5:
            failures.append(f"controlled square a=0 t={t}")
        if ControlledSineWave.clean(t, 1.0) != SineWave.clean(t):
            failures.append(f"controlled sine a=1 t={t}")
        if ControlledSineWave.clean(t, 0.0) != 0.5:
            failures.append(f"controlled sine a=0 t={t}")

    # emitted noise matches the configured std
    noisy = SquareWave(np.random.default_rng(seed), noise_std=0.05)
    residuals = np.array(
        [float(noisy.step()[0]) - SquareWave.clean(t) for t in range(100000)]
    )
    std = residuals.std()
    if not 0.95 * 0.05 <= std <= 1.05 * 0.05:
        failures.append(f"square wave noise std {std:.5f} not within 5% of 0.05")

    # mountain car stays inside its state box under random throttle
    car = MountainCarPO(np.random.default_rng(seed), noise_std=0.0)
    throttle_rng = np.random.default_rng(seed + 1)
    for t in range(10000):
        car.step(np.array([throttle_rng.uniform(-1.0, 1.0)]))
        if not (-1.2 <= car.position <= 0.6 and -0.07 <= car.velocity <= 0.07):
            failures.append(f"mountain car out of bounds at t={t}")
            break

    # the behavior policy: bounded, smooth, constant when walk_std = 0
    bounds = SquareWave(np.random.default_rng(0), 0.0).spec.obs_bounds
    frozen = RandomWalkPolicy(np.random.default_rng(seed), bounds, walk_std=0.0)
    first = frozen.step()
    if any(float(np.max(np.abs(frozen.step() - first))) > 0 for _ in range(50)):
        failures.append("walk_std=0 policy moved")
    walker = RandomWalkPolicy(np.random.default_rng(seed + 2), bounds, walk_std=0.1)
    series = np.array([float(walker.step()[0]) for _ in range(100000)])
    if series.min() < 0.0 or series.max() > 1.0:
        failures.append("policy left the action box")
    lag1 = float(np.corrcoef(series[:-1], series[1:])[0, 1])
    if lag1 <= 0.9:
        failures.append(f"policy lag-1 autocorrelation {lag1:.4f} <= 0.9")

    return failures


SUITES = {
    "traces": suite_traces,
    "oracle": suite_oracle,
    "gradients": suite_gradients,
    "systems": suite_systems,
}


def run_suite(key: str) -> list[str]:
    try:
        suite = SUITES[key]
    except KeyError:
        raise KeyError(f"unknown suite {key!r}; choose from {tuple(SUITES)}") from None
    return suite()
