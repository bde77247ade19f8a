"""Configuration package for the ICU Agent Pipeline"""

from .config import (
    ConfigError,
    ExperimentConfig,
    ProviderSettings,
    RetrySettings,
    SystemSettings,
    settings,
    get_settings,
    load_experiment_config,
)
from .logging_config import setup_logging, pipeline_logger, log_function_call

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ProviderSettings",
    "RetrySettings",
    "SystemSettings",
    "settings",
    "get_settings",
    "load_experiment_config",
    "setup_logging",
    "pipeline_logger",
    "log_function_call",
]
