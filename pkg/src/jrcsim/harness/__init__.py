"""Experiment runner: JSON config, named presets, stable table output."""

from .config import RunConfig, default_config, load_config, loads
from .experiments import ExperimentError, ExperimentSpec, run_experiment
from .tables import Column, ResultTable, emit, load, render
