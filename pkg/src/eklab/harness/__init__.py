"""Scenario configuration, experiment pipelines and the ``ek`` command line."""
from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .pipelines import (
    CommutatorReport,
    CommutatorScan,
    ReportBundle,
    commutator_scan,
    fit_decay_rate,
    predict_exponents,
    run_scenario,
)
from .synthetic import synthetic_trajectory

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "load_config",
    "parse_config",
    "CommutatorReport",
    "CommutatorScan",
    "ReportBundle",
    "commutator_scan",
    "fit_decay_rate",
    "predict_exponents",
    "run_scenario",
    "synthetic_trajectory",
]
