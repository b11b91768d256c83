"""
Plain-text experiment configuration.

Format: one `key = value` pair per line, `#` starts a comment, blank lines
are ignored. Absent keys keep their TrainConfig defaults; unknown keys and
unparsable values are rejected with the offending line number.
"""

from pathlib import Path
from typing import Dict, Union

from pydantic import ValidationError

from ..errors import ConfigError
from ..models.core import TrainConfig

# Short spellings accepted in config files
KEY_ALIASES: Dict[str, str] = {
    "dropout": "dropout_rate",
}


def parse_config(text: str) -> TrainConfig:
    """
    Parse key = value text into a TrainConfig.

    Args:
        text: Configuration file contents

    Returns:
        Validated TrainConfig with defaults applied for absent keys

    Raises:
        ConfigError: unknown key, duplicate key, malformed line or invalid value
    """
    values: Dict[str, str] = {}
    key_lines: Dict[str, int] = {}

    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", line_number)

        key, value = (part.strip() for part in line.split("=", 1))
        key = KEY_ALIASES.get(key, key)
        if key not in TrainConfig.model_fields:
            raise ConfigError(f"unknown key {key!r}", line_number)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first on line {key_lines[key]})", line_number)
        if not value:
            raise ConfigError(f"missing value for {key!r}", line_number)

        values[key] = value
        key_lines[key] = line_number

    try:
        return TrainConfig.model_validate(values)
    except ValidationError as exc:
        error = exc.errors()[0]
        field = str(error["loc"][0]) if error["loc"] else ""
        raise ConfigError(
            f"invalid value for {field!r}: {error['msg']}",
            key_lines.get(field)
        ) from exc


def format_config(cfg: TrainConfig) -> str:
    """Render a TrainConfig in the key = value format parse_config reads."""
    lines = []
    for key, value in cfg.echo().items():
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path: Union[str, Path, None]) -> TrainConfig:
    """Read a config file; None yields the default configuration."""
    if path is None:
        return TrainConfig()
    config_file = Path(path)
    try:
        text = config_file.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {config_file}: {exc.strerror}") from exc
    return parse_config(text)
