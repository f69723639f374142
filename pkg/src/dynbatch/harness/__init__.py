"""Experiment orchestration: configs, replicated runs, fits, export and verification."""

from .analysis import complexity_curve, fit_geometric_rate, fit_power_rate
from .config import ConfigError, ExperimentConfig
from .export import export
from .runner import ExperimentResult, run_experiment
