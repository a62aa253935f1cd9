from .base import (
    AlignedData,
    ConfigError,
    DataError,
    ForecastPanel,
    InvariantViolation,
    LeakageError,
    MetaModel,
    SelectorSpec,
    SeriesFrame,
    TrainingSet,
    align_panel,
    z_interval,
)
from .config import ExperimentConfig, load_config
from .stacking import RunResult, StackingExperiment, best_variant, pick_test_points, run_experiment

__version__ = "0.1.0"
__author__ = "stackforecast developers"
__url__ = ""
