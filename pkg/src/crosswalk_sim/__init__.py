"""Headless Monte Carlo simulator of pedestrian crossings at a signalized crosswalk."""

__version__ = "0.1.0"

from .config import InvalidConfig, ScenarioConfig, load_config, validate_config
from .engine import TrialOutcome, run_trial
from .light import LightState
from .stats import AggregateStats, BatchConfig, aggregate, pearson, run_batch

__all__ = [
    "AggregateStats",
    "BatchConfig",
    "InvalidConfig",
    "LightState",
    "ScenarioConfig",
    "TrialOutcome",
    "aggregate",
    "load_config",
    "pearson",
    "run_batch",
    "run_trial",
    "validate_config",
]
