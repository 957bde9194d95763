"""Continuous TD(lambda) networks: predictive-state models learned online
from noisy continuous observation (and action) streams."""

from .answer import (
    DivergenceError,
    InputLayout,
    apply_row_update,
    assemble_input,
    load_weights,
    predict,
    save_weights,
)
from .basis import BoxBounds, RbfGrid, indicator_map, make_grid, unit_bounds
from .estimator import ContinuousTDNetwork
from .evaluation import FeatureValuePredictor, one_step_feature_prediction, rmse_step
from .harness import (
    ConfigError,
    ExperimentConfig,
    FloorEstimate,
    LearningCurve,
    aggregate_curve,
    build_run_components,
    load_config,
    noise_floor,
    run_experiment,
    run_single,
    save_config,
    write_curve_csv,
    write_per_run_csv,
    write_sweep_csv,
)
from .learner import StepDiagnostics, TDNetworkLearner, Trace, TraceUpdateEvent
from .presets import FIGURE_KEYS, PRESETS
from .question import (
    FeatureObs,
    NodePred,
    QuestionNetwork,
    QuestionNode,
    build_chain_network,
    feature_child_matrix,
)
from .systems import (
    SYSTEM_KEYS,
    ControlledSineWave,
    ControlledSquareWave,
    MountainCarPO,
    RandomWalkPolicy,
    SineWave,
    SquareWave,
    clean_trajectory,
    make_system,
)

__version__ = "0.1.0"

__all__ = [
    "BoxBounds",
    "ConfigError",
    "ContinuousTDNetwork",
    "ControlledSineWave",
    "ControlledSquareWave",
    "DivergenceError",
    "ExperimentConfig",
    "FIGURE_KEYS",
    "FeatureObs",
    "FeatureValuePredictor",
    "FloorEstimate",
    "InputLayout",
    "LearningCurve",
    "MountainCarPO",
    "NodePred",
    "PRESETS",
    "QuestionNetwork",
    "QuestionNode",
    "RandomWalkPolicy",
    "RbfGrid",
    "SYSTEM_KEYS",
    "SineWave",
    "SquareWave",
    "StepDiagnostics",
    "TDNetworkLearner",
    "Trace",
    "TraceUpdateEvent",
    "aggregate_curve",
    "apply_row_update",
    "assemble_input",
    "build_chain_network",
    "build_run_components",
    "clean_trajectory",
    "feature_child_matrix",
    "indicator_map",
    "load_config",
    "load_weights",
    "make_grid",
    "make_system",
    "noise_floor",
    "one_step_feature_prediction",
    "predict",
    "rmse_step",
    "run_experiment",
    "run_single",
    "save_config",
    "save_weights",
    "unit_bounds",
    "write_curve_csv",
    "write_per_run_csv",
    "write_sweep_csv",
]
