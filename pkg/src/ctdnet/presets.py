"""Fixed experiment presets for the five benchmark figures.

fig5: uncontrolled square wave, single depth.
fig6: uncontrolled sine wave, depth sweep.
fig7: controlled square wave, single depth.
fig8: controlled sine wave, depth sweep.
fig9: partially observable mountain car, single depth.

Waves run 10,000 steps, mountain car 20,000 (long enough to cover
convergence comfortably); every preset uses 30 runs, 100-step windows,
grids of 4 centers per dimension, feature width 0.3, activation width
0.1, alpha 0.01 and lambda 1.
"""

from __future__ import annotations

from dataclasses import dataclass

from .harness import ExperimentConfig


@dataclass(frozen=True)
class FigurePreset:
    key: str
    config: ExperimentConfig
    depths: tuple[int, ...] | None  # None: single experiment at config.chain_depth
    label: str


_COMMON = dict(
    n=4,
    m=4,
    sigma_phi=0.3,
    sigma_psi=0.1,
    chain_depth=5,
    alpha=0.01,
    lam=1.0,
    steps=10000,
    runs=30,
    base_seed=12345,
    window=100,
    walk_std=0.1,
    noise_std=0.05,
)

_SWEEP_DEPTHS = (1, 2, 3, 4, 5, 6, 7)

PRESETS: dict[str, FigurePreset] = {
    "fig5": FigurePreset(
        "fig5",
        ExperimentConfig(system="square", **_COMMON),
        None,
        "square wave",
    ),
    "fig6": FigurePreset(
        "fig6",
        ExperimentConfig(system="sine", **_COMMON),
        _SWEEP_DEPTHS,
        "sine wave",
    ),
    "fig7": FigurePreset(
        "fig7",
        ExperimentConfig(system="square-ctl", **_COMMON),
        None,
        "controlled square wave",
    ),
    "fig8": FigurePreset(
        "fig8",
        ExperimentConfig(system="sine-ctl", **_COMMON),
        _SWEEP_DEPTHS,
        "controlled sine wave",
    ),
    "fig9": FigurePreset(
        "fig9",
        ExperimentConfig(system="mcar-po", **dict(_COMMON, steps=20000)),
        None,
        "mountain car (position only)",
    ),
}

FIGURE_KEYS = tuple(PRESETS)
