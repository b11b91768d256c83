"""
Logging setup.

Records go to stderr and, when configured, to a size-rotated file. stdout
is reserved for command results and the CSV epoch log.
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import TYPE_CHECKING, Dict, Optional

from .settings import LoggingConfig

if TYPE_CHECKING:
    from ..models.metrics import EpochRecord

# Floors applied on top of the configured level
COMPONENT_FLOORS: Dict[str, int] = {
    "layer": logging.INFO,
    "layer_registry": logging.INFO,
}

COMPONENTS = ("trainer", "experiment", "datagen", "codec", "cli", "config")


def _handlers(config: LoggingConfig):
    yield logging.StreamHandler(sys.stderr)
    if config.file_path:
        path = Path(config.file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        yield logging.handlers.RotatingFileHandler(
            filename=path, maxBytes=config.max_file_size, backupCount=config.backup_count
        )


def setup_logging(config: Optional[LoggingConfig] = None) -> None:
    """
    Install the root handlers, replacing any previous ones.

    Args:
        config: Level, format and optional rotating file; defaults when None
    """
    config = config or LoggingConfig()
    level = logging.getLevelName(config.level.upper())
    if not isinstance(level, int):
        raise ValueError(f"unknown log level {config.level!r}")

    root = logging.getLogger()
    root.handlers.clear()
    root.setLevel(level)
    formatter = logging.Formatter(config.format)
    for handler in _handlers(config):
        handler.setLevel(level)
        handler.setFormatter(formatter)
        root.addHandler(handler)

    for name in COMPONENTS:
        logging.getLogger(name).setLevel(level)
    for name, floor in COMPONENT_FLOORS.items():
        logging.getLogger(name).setLevel(max(level, floor))

    logging.getLogger("cli").debug(f"logging at {config.level.upper()} to {len(root.handlers)} handler(s)")


def log_epoch(record: "EpochRecord", run_name: Optional[str] = None) -> None:
    """Emit one epoch summary on the trainer logger (or trainer.<run_name>)."""
    logger = logging.getLogger(f"trainer.{run_name}" if run_name else "trainer")
    test_part = "n/a" if record.test_acc is None else f"{record.test_acc:.4f}"
    logger.info(
        f"epoch {record.epoch}: loss={record.train_loss:.6f} "
        f"train_acc={record.train_acc:.4f} test_acc={test_part}"
    )
