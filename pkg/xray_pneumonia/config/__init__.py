"""
Configuration module for the pneumonia classification toolkit.

Handles configuration management for:
- Runtime settings (logging, worker counts)
- Experiment configuration files (key = value)
- Logging setup
"""

from .settings import Settings, LoggingConfig, get_settings, reset_settings
from .logging import setup_logging, log_epoch
from .train_config import parse_config, format_config, load_config

__all__ = [
    "Settings",
    "LoggingConfig",
    "get_settings",
    "reset_settings",
    "setup_logging",
    "log_epoch",
    "parse_config",
    "format_config",
    "load_config"
]
