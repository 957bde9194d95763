"""The five benchmark dynamical systems and the behavior policy.

Every system emits, per step, a clean scalar trajectory value corrupted
by mean-zero Gaussian observation noise.  Internal state always evolves
on clean values; noise touches only the emitted observation.  Controlled
systems consume a one-dimensional action each step and apply it
instantaneously (the emitted value uses the current step's action).

Keys: "square", "sine" (uncontrolled waves), "square-ctl", "sine-ctl"
(action-scaled waves over actions in [0, 1]), and "mcar-po" (mountain
car with the velocity component hidden; continuous throttle in [-1, 1]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import BoxBounds
from .validation import as_point, check_non_negative


@dataclass(frozen=True)
class SystemSpec:
    """Static shape and noise description of a system."""

    obs_dim: int
    action_dim: int  # 0 encodes uncontrolled
    obs_bounds: BoxBounds
    action_bounds: BoxBounds | None
    noise_std: float

    def __post_init__(self) -> None:
        check_non_negative(self.noise_std, "noise_std")
        if self.obs_dim < 1 or self.action_dim < 0:
            raise ValueError(f"invalid dims ({self.obs_dim}, {self.action_dim})")
        if (self.action_dim > 0) != (self.action_bounds is not None):
            raise ValueError("action_bounds present iff action_dim > 0")

    @property
    def controlled(self) -> bool:
        return self.action_dim > 0


class _WaveBase:
    """Shared emit-noise / action-validation plumbing."""

    spec: SystemSpec

    def __init__(self, rng: np.random.Generator, noise_std: float):
        self.rng = rng
        self.noise_std = float(noise_std)

    def _emit(self, clean: float) -> np.ndarray:
        noise = self.rng.normal(0.0, self.noise_std, size=self.spec.obs_dim)
        return np.array([clean], dtype=np.float64) + noise

    def _take_action(self, action) -> float | None:
        if self.spec.controlled:
            if action is None:
                raise ValueError("controlled system requires an action")
            return float(as_point(action, self.spec.action_bounds.dim, "action")[0])
        if action is not None:
            raise ValueError("uncontrolled system accepts no action")
        return None


_UNIT = BoxBounds((0.0,), (1.0,))


class SquareWave(_WaveBase):
    """Alternates 0 (phases 0-4) and 1 (phases 5-9), period 10."""

    def __init__(self, rng, noise_std: float = 0.05, initial_phase: int = 0):
        super().__init__(rng, noise_std)
        self.spec = SystemSpec(1, 0, _UNIT, None, self.noise_std)
        self.phase = int(initial_phase) % 10

    @staticmethod
    def clean(phase: int) -> float:
        return 1.0 if phase % 10 >= 5 else 0.0

    def step(self, action=None) -> np.ndarray:
        self._take_action(action)
        obs = self._emit(self.clean(self.phase))
        self.phase = (self.phase + 1) % 10
        return obs


class SineWave(_WaveBase):
    """Emits (sin(0.5 t) + 1) / 2 for t = 0, 1, 2, ..."""

    def __init__(self, rng, noise_std: float = 0.05, initial_phase: int = 0):
        super().__init__(rng, noise_std)
        self.spec = SystemSpec(1, 0, _UNIT, None, self.noise_std)
        self.t = int(initial_phase)

    @staticmethod
    def clean(t: int) -> float:
        return (math.sin(0.5 * t) + 1.0) / 2.0

    def step(self, action=None) -> np.ndarray:
        self._take_action(action)
        obs = self._emit(self.clean(self.t))
        self.t += 1
        return obs


class ControlledSquareWave(_WaveBase):
    """Square wave whose amplitude tracks the action: the low half-cycle
    emits (1-a)/2 and the high half-cycle a + (1-a)/2, so a=1 recovers
    the uncontrolled wave and a=0 collapses to a constant 0.5."""

    def __init__(self, rng, noise_std: float = 0.05, initial_phase: int = 0):
        super().__init__(rng, noise_std)
        self.spec = SystemSpec(1, 1, _UNIT, _UNIT, self.noise_std)
        self.phase = int(initial_phase) % 10

    @staticmethod
    def clean(phase: int, a: float) -> float:
        low = (1.0 - a) / 2.0
        return a + low if phase % 10 >= 5 else low

    def step(self, action=None) -> np.ndarray:
        a = self._take_action(action)
        obs = self._emit(self.clean(self.phase, a))
        self.phase = (self.phase + 1) % 10
        return obs


class ControlledSineWave(_WaveBase):
    """Sine wave whose amplitude tracks the action:
    a/2 * (sin(0.5 t) + 1) + (1-a)/2."""

    def __init__(self, rng, noise_std: float = 0.05, initial_phase: int = 0):
        super().__init__(rng, noise_std)
        self.spec = SystemSpec(1, 1, _UNIT, _UNIT, self.noise_std)
        self.t = int(initial_phase)

    @staticmethod
    def clean(t: int, a: float) -> float:
        return a / 2.0 * (math.sin(0.5 * t) + 1.0) + (1.0 - a) / 2.0

    def step(self, action=None) -> np.ndarray:
        a = self._take_action(action)
        obs = self._emit(self.clean(self.t, a))
        self.t += 1
        return obs


class MountainCarPO(_WaveBase):
    """Standard mountain car dynamics with the velocity hidden.

    Per step with throttle a in [-1, 1]:
      velocity' = clamp(velocity + 0.001 a - 0.0025 cos(3 position), +-0.07)
      position' = clamp(position + velocity', [-1.2, 0.6])
    Hitting the left wall zeroes the velocity; reaching the right edge
    resets to the start state (-0.5, 0) so runs continue indefinitely.
    The clean observation is the new position only.
    """

    POSITION_MIN = -1.2
    POSITION_MAX = 0.6
    VELOCITY_MAX = 0.07
    START_POSITION = -0.5

    def __init__(self, rng, noise_std: float = 0.05, initial_phase: int = 0):
        # initial_phase is accepted for interface uniformity and ignored
        super().__init__(rng, noise_std)
        self.spec = SystemSpec(
            1,
            1,
            BoxBounds((self.POSITION_MIN,), (self.POSITION_MAX,)),
            BoxBounds((-1.0,), (1.0,)),
            self.noise_std,
        )
        self.position = self.START_POSITION
        self.velocity = 0.0

    @classmethod
    def dynamics(cls, position: float, velocity: float, a: float) -> tuple[float, float]:
        """One clean Euler step, including wall and reset rules."""
        velocity = velocity + 0.001 * a - 0.0025 * math.cos(3.0 * position)
        velocity = min(max(velocity, -cls.VELOCITY_MAX), cls.VELOCITY_MAX)
        position = position + velocity
        if position <= cls.POSITION_MIN:
            position = cls.POSITION_MIN
            velocity = 0.0
        elif position >= cls.POSITION_MAX:
            position = cls.START_POSITION
            velocity = 0.0
        return position, velocity

    def step(self, action=None) -> np.ndarray:
        a = self._take_action(action)
        self.position, self.velocity = self.dynamics(self.position, self.velocity, a)
        return self._emit(self.position)


class RandomWalkPolicy:
    """Smoothed random walk over the action box.

    The first action is a uniform draw over the box; each later action
    adds per-dimension Gaussian steps of std ``walk_std`` and clamps.
    ``walk_std = 0`` therefore holds the initial draw forever.
    """

    def __init__(self, rng: np.random.Generator, bounds: BoxBounds, walk_std: float = 0.1):
        check_non_negative(walk_std, "walk_std")
        self.rng = rng
        self.bounds = bounds
        self.walk_std = float(walk_std)
        self._action: np.ndarray | None = None

    def step(self) -> np.ndarray:
        if self._action is None:
            self._action = self.rng.uniform(self.bounds.low, self.bounds.high)
        else:
            drift = self.rng.normal(0.0, self.walk_std, size=self.bounds.dim)
            self._action = self.bounds.clip(self._action + drift)
        return self._action.copy()


SYSTEM_KEYS = ("square", "sine", "square-ctl", "sine-ctl", "mcar-po")

_REGISTRY = {
    "square": SquareWave,
    "sine": SineWave,
    "square-ctl": ControlledSquareWave,
    "sine-ctl": ControlledSineWave,
    "mcar-po": MountainCarPO,
}


def make_system(key: str, rng: np.random.Generator, *, noise_std: float = 0.05,
                initial_phase: int = 0):
    """Instantiate a benchmark system by its string key."""
    try:
        cls = _REGISTRY[key]
    except KeyError:
        raise KeyError(f"unknown system key {key!r}; choose from {SYSTEM_KEYS}") from None
    return cls(rng, noise_std=noise_std, initial_phase=initial_phase)


def clean_trajectory(key: str, length: int = 1000) -> np.ndarray:
    """The noise-free emission cycle of an uncontrolled wave.

    The square wave is exactly periodic, so its cycle is the 10 phase
    values; the sine wave's period is irrational, so the first ``length``
    values stand in for the cycle.  Systems whose clean value depends on
    actions (or on hidden state, like mountain car) have no fixed clean
    trajectory and are rejected.
    """
    if key == "square":
        return np.array([SquareWave.clean(p) for p in range(10)], dtype=np.float64)
    if key == "sine":
        return np.array([SineWave.clean(t) for t in range(length)], dtype=np.float64)
    raise ValueError(f"system {key!r} has no action-free clean trajectory")
