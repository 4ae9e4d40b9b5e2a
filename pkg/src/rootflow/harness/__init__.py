"""Experiment configuration, runners and report emitters."""
from .config import EXPERIMENTS, ExperimentConfig, config_from_dict, load_config
from .experiments import (
    radial_root_measure,
    run_circular,
    run_complex,
    run_experiment,
    run_pde_check,
    run_radial,
    run_real,
)
from .report import Check, ComparisonReport, thresholds

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "config_from_dict",
    "load_config",
    "run_experiment",
    "run_radial",
    "run_real",
    "run_circular",
    "run_complex",
    "run_pde_check",
    "radial_root_measure",
    "Check",
    "ComparisonReport",
    "thresholds",
]
