"""
Process-level runtime settings.

Experiment hyperparameters live in TrainConfig (see train_config.py). This
module covers what changes between machines rather than between runs:
log destination and verbosity, the ablation thread pool and the evaluation
chunk size. Sources, lowest precedence first: dataclass defaults, the JSON
file named by XRAY_CONFIG, XRAY_* environment variables (a .env file is
honoured).
"""

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple
import json
import logging
import os

from dotenv import load_dotenv

DEFAULT_SETTINGS_PATH = "config/settings.json"

logger = logging.getLogger("config")


@dataclass
class LoggingConfig:
    """Where log records go and how they look."""
    level: str = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    file_path: Optional[str] = None
    max_file_size: int = 10 * 1024 * 1024
    backup_count: int = 5


@dataclass
class Settings:
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    # threads used by `xray experiment` when --jobs is not given
    experiment_workers: int = 1
    # samples per forward pass in eval and predict
    eval_batch_size: int = 256

    def __post_init__(self):
        for name in ("experiment_workers", "eval_batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Settings":
        """Build settings from parsed JSON; unknown keys are logged and ignored."""
        known = {f.name for f in fields(cls)}
        for key in sorted(set(data) - known):
            logger.warning(f"ignoring unknown settings key {key!r}")
        values = {key: value for key, value in data.items() if key in known and key != "logging"}
        log_cfg = LoggingConfig(**data.get("logging", {}))
        return cls(logging=log_cfg, **values)

    @classmethod
    def from_file(cls, path: str) -> "Settings":
        """Read a JSON settings file; a missing or broken file yields defaults."""
        settings_file = Path(path)
        if not settings_file.exists():
            logger.warning(f"settings file {settings_file} not found, using defaults")
            return cls()
        try:
            return cls.from_dict(json.loads(settings_file.read_text(encoding="utf-8")))
        except (OSError, TypeError, ValueError) as e:
            logger.error(f"cannot load settings from {settings_file}: {e}")
            return cls()

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def save_to_file(self, path: str) -> None:
        settings_file = Path(path)
        settings_file.parent.mkdir(parents=True, exist_ok=True)
        settings_file.write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")


# environment variable -> (attribute path, converter)
ENV_OVERRIDES: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "XRAY_LOG_LEVEL": ("logging.level", str.upper),
    "XRAY_LOG_FILE": ("logging.file_path", str),
    "XRAY_EXPERIMENT_WORKERS": ("experiment_workers", int),
    "XRAY_EVAL_BATCH_SIZE": ("eval_batch_size", int),
}


def apply_environment(settings: Settings) -> Settings:
    """Overlay XRAY_* variables onto `settings` in place."""
    for variable, (attribute, convert) in ENV_OVERRIDES.items():
        raw = os.getenv(variable)
        if not raw:
            continue
        target = settings
        *parents, leaf = attribute.split(".")
        for parent in parents:
            target = getattr(target, parent)
        setattr(target, leaf, convert(raw))
    return settings


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Process-wide settings, resolved once."""
    global _settings
    if _settings is None:
        load_dotenv()
        _settings = apply_environment(Settings.from_file(os.getenv("XRAY_CONFIG", DEFAULT_SETTINGS_PATH)))
    return _settings


def reset_settings() -> None:
    """Forget the cached settings; the next get_settings() re-reads every source."""
    global _settings
    _settings = None
