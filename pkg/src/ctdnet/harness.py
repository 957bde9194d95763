"""Experiment orchestration: policy -> system -> learner, curves, persistence.

A run streams one system trajectory through one learner.  At every step
the harness first asks the policy for an action (controlled systems),
lets the system emit the resulting observation, and records the
evaluation pair BEFORE the learner updates: the predicted feature
values come from the pre-step state and the chosen action, the realized
values from the observation that action just produced.  The per-step
RMSE stream is then averaged over non-overlapping windows and across
independently seeded runs.

Runs are embarrassingly parallel and bit-reproducible: run ``r`` of a
config derives every generator from ``base_seed + r``, so serial and
process-pool execution produce identical curves.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .answer import DivergenceError
from .basis import make_grid
from .evaluation import rmse_step
from .learner import TDNetworkLearner
from .question import build_chain_network
from .systems import SYSTEM_KEYS, RandomWalkPolicy, clean_trajectory, make_system


class ConfigError(ValueError):
    """Malformed experiment configuration (bad field, key, or file)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a system, a model shape, and a run protocol.

    ``n`` and ``m`` are the per-dimension center counts of the
    observation feature grid and the action activation grid; ``lam`` is
    serialized under the JSON key "lambda".  ``m``, ``sigma_psi`` and
    ``walk_std`` are ignored for uncontrolled systems.
    """

    system: str
    n: int = 4
    m: int = 4
    sigma_phi: float = 0.3
    sigma_psi: float = 0.1
    chain_depth: int = 5
    alpha: float = 0.01
    lam: float = 1.0
    steps: int = 10000
    runs: int = 30
    base_seed: int = 12345
    window: int = 100
    walk_std: float = 0.1
    noise_std: float = 0.05
    initial_phase: int = 0
    normalize_eval_weights: bool = True
    sliding_window: bool = False

    def __post_init__(self) -> None:
        if self.system not in SYSTEM_KEYS:
            raise ConfigError(f"unknown system key {self.system!r}; choose from {SYSTEM_KEYS}")
        for name in ("n", "m", "chain_depth", "steps", "runs", "window"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        for name in ("sigma_phi", "sigma_psi", "alpha"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigError(f"{name} must be positive, got {value!r}")
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lambda must be in [0, 1], got {self.lam!r}")
        for name in ("walk_std", "noise_std"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)!r}")
        if not isinstance(self.base_seed, int) or isinstance(self.base_seed, bool) or self.base_seed < 0:
            raise ConfigError(f"base_seed must be a non-negative integer, got {self.base_seed!r}")
        if self.window > self.steps:
            raise ConfigError(f"window ({self.window}) must not exceed steps ({self.steps})")
        if not isinstance(self.initial_phase, int) or isinstance(self.initial_phase, bool):
            raise ConfigError(f"initial_phase must be an integer, got {self.initial_phase!r}")


# "lambda" is a Python keyword, so the dataclass field is `lam`; files
# use the plain name.
_FIELD_TO_KEY = {"lam": "lambda"}
_KEY_TO_FIELD = {"lambda": "lam"}


def config_to_dict(config: ExperimentConfig) -> dict:
    out = {}
    for field in dataclasses.fields(config):
        out[_FIELD_TO_KEY.get(field.name, field.name)] = getattr(config, field.name)
    return out


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"config must be a JSON object, got {type(data).__name__}")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    kwargs = {}
    for key, value in data.items():
        name = _KEY_TO_FIELD.get(key, key)
        if name not in known:
            raise ConfigError(f"unknown config key {key!r}")
        kwargs[name] = value
    if "system" not in kwargs:
        raise ConfigError("config is missing the required key 'system'")
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as err:
        raise ConfigError(str(err)) from err


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}") from err
    return config_from_dict(data)


def save_config(config: ExperimentConfig, path) -> None:
    atomic_write_text(path, json.dumps(config_to_dict(config), indent=2) + "\n")


@dataclass(frozen=True)
class LearningCurve:
    """Per-step errors plus their windowed, cross-run aggregation."""

    window: int
    t_end: np.ndarray  # (n_windows,) last step index (exclusive) of each window
    per_run_step: np.ndarray  # (runs, steps) per-step RMSE
    per_run_window: np.ndarray  # (runs, n_windows) window means
    mean: np.ndarray  # (n_windows,) cross-run mean
    se: np.ndarray  # (n_windows,) cross-run standard error of the mean

    @property
    def runs(self) -> int:
        return self.per_run_step.shape[0]


def build_run_components(config: ExperimentConfig, run_index: int):
    """Everything one run needs: (system, policy, feature grid, learner).

    Run ``run_index`` seeds its system and policy generators from
    independent streams spawned off ``base_seed + run_index``.
    """
    seed_seq = np.random.SeedSequence(config.base_seed + run_index)
    system_seq, policy_seq = seed_seq.spawn(2)
    system = make_system(
        config.system,
        np.random.default_rng(system_seq),
        noise_std=config.noise_std,
        initial_phase=config.initial_phase,
    )
    spec = system.spec
    phi = make_grid(spec.obs_bounds, config.n, config.sigma_phi)
    if spec.controlled:
        psi = make_grid(spec.action_bounds, config.m, config.sigma_psi)
        policy = RandomWalkPolicy(
            np.random.default_rng(policy_seq), spec.action_bounds, config.walk_std
        )
    else:
        psi = None
        policy = None
    network = build_chain_network(len(phi), len(psi) if psi is not None else 0, config.chain_depth)
    learner = TDNetworkLearner(
        network,
        phi,
        psi,
        alpha=config.alpha,
        lam=config.lam,
        eval_normalize=config.normalize_eval_weights,
    )
    return system, policy, phi, learner


def run_single(config: ExperimentConfig, run_index: int) -> np.ndarray:
    """One seeded run; returns the per-step RMSE stream, shape (steps,)."""
    system, policy, phi, learner = build_run_components(config, run_index)
    step_rmse = np.empty(config.steps, dtype=np.float64)
    try:
        for t in range(config.steps):
            action = policy.step() if policy is not None else None
            obs = system.step(action)
            _, diag = learner.step(obs, action)
            step_rmse[t] = rmse_step(diag.feature_predictions, phi.evaluate(obs))
    except DivergenceError as err:
        raise DivergenceError(
            f"run {run_index}: {err}", step=err.step, node=err.node
        ) from err
    return step_rmse


def aggregate_curve(per_run_step: np.ndarray, window: int, sliding: bool = False) -> LearningCurve:
    """Window the per-step RMSE streams and aggregate across runs.

    Default: non-overlapping blocks of ``window`` steps (a trailing
    partial block is dropped).  ``sliding``: one point per step from
    ``window - 1`` on, each the mean of the previous ``window`` steps.
    """
    per_run_step = np.asarray(per_run_step, dtype=np.float64)
    runs, steps = per_run_step.shape
    if sliding:
        views = np.lib.stride_tricks.sliding_window_view(per_run_step, window, axis=1)
        per_run_window = views.mean(axis=2)
        t_end = np.arange(window, steps + 1, dtype=np.int64)
    else:
        n_windows = steps // window
        blocks = per_run_step[:, : n_windows * window].reshape(runs, n_windows, window)
        per_run_window = blocks.mean(axis=2)
        t_end = (np.arange(n_windows, dtype=np.int64) + 1) * window
    mean = per_run_window.mean(axis=0)
    if runs > 1:
        se = per_run_window.std(axis=0, ddof=1) / math.sqrt(runs)
    else:
        se = np.zeros_like(mean)
    return LearningCurve(
        window=window,
        t_end=t_end,
        per_run_step=per_run_step,
        per_run_window=per_run_window,
        mean=mean,
        se=se,
    )


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> LearningCurve:
    """All runs of a config, serial or process-parallel (identical output)."""
    if jobs <= 1:
        rows = [run_single(config, r) for r in range(config.runs)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(partial(run_single, config), range(config.runs)))
    return aggregate_curve(np.vstack(rows), config.window, config.sliding_window)


class FloorEstimate(NamedTuple):
    floor: float
    se: float


def noise_floor(
    system_key: str,
    phi,
    noise_std: float,
    samples: int,
    seed: int = 0,
    cycle_length: int = 1000,
) -> FloorEstimate:
    """Monte-Carlo estimate of the irreducible one-step feature RMSE.

    The best possible prediction of a noisy feature value is its
    expectation, so the floor is sqrt(mean over features and clean-cycle
    phases of Var[phi_f(clean + noise)]), with ``samples`` draws per
    phase.  The returned standard error comes from batch means.  Only
    systems with an action-free clean trajectory qualify (the waves).
    """
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    clean = clean_trajectory(system_key, cycle_length)
    rng = np.random.default_rng(seed)
    n_batches = 20 if samples >= 40 else 1
    batch_size = samples // n_batches
    pooled_sum = 0.0
    pooled_count = 0
    batch_sums = np.zeros(n_batches, dtype=np.float64)
    batch_count = 0
    for value in clean:
        draws = rng.normal(value, noise_std, size=samples)
        feats = phi.transform(draws[:, None])
        pooled_sum += float(feats.var(axis=0, ddof=1).sum())
        pooled_count += feats.shape[1]
        if n_batches > 1:
            batched = feats[: n_batches * batch_size].reshape(n_batches, batch_size, -1)
            batch_sums += batched.var(axis=1, ddof=1).sum(axis=1)
            batch_count += feats.shape[1]
    floor = math.sqrt(pooled_sum / pooled_count)
    if n_batches > 1:
        batch_floors = np.sqrt(batch_sums / batch_count)
        se = float(batch_floors.std(ddof=1) / math.sqrt(n_batches))
    else:
        se = 0.0
    return FloorEstimate(floor=floor, se=se)


# -- persistence ---------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def atomic_write_text(path, text: str) -> None:
    """Write-temp-then-rename so concurrent readers never see partial files."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="ascii") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def curve_csv_text(curve: LearningCurve) -> str:
    lines = ["window_index,t_end,mean_rmse,se_rmse,runs"]
    for w in range(curve.mean.shape[0]):
        lines.append(
            f"{w},{int(curve.t_end[w])},{_fmt(curve.mean[w])},{_fmt(curve.se[w])},{curve.runs}"
        )
    return "\n".join(lines) + "\n"


def write_curve_csv(curve: LearningCurve, path) -> None:
    atomic_write_text(path, curve_csv_text(curve))


def per_run_csv_text(curve: LearningCurve) -> str:
    lines = ["run,window_index,rmse"]
    for r in range(curve.runs):
        for w in range(curve.per_run_window.shape[1]):
            lines.append(f"{r},{w},{_fmt(curve.per_run_window[r, w])}")
    return "\n".join(lines) + "\n"


def write_per_run_csv(curve: LearningCurve, path) -> None:
    atomic_write_text(path, per_run_csv_text(curve))


def sweep_csv_text(curves: dict[int, LearningCurve]) -> str:
    lines = ["depth,window_index,t_end,mean_rmse,se_rmse,runs"]
    for depth in sorted(curves):
        curve = curves[depth]
        for w in range(curve.mean.shape[0]):
            lines.append(
                f"{depth},{w},{int(curve.t_end[w])},{_fmt(curve.mean[w])},"
                f"{_fmt(curve.se[w])},{curve.runs}"
            )
    return "\n".join(lines) + "\n"


def write_sweep_csv(curves: dict[int, LearningCurve], path) -> None:
    atomic_write_text(path, sweep_csv_text(curves))


def write_floor_csv(system_key: str, samples: int, estimate: FloorEstimate, path) -> None:
    text = (
        "system,samples,floor,se_floor\n"
        f"{system_key},{samples},{_fmt(estimate.floor)},{_fmt(estimate.se)}\n"
    )
    atomic_write_text(path, text)
