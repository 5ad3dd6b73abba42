"""Key=value config files with environment overrides.

Precedence: command-line flag, then ONTOEXT_<KEY> environment variable,
then config file, then built-in default. API credentials are read only
from the environment, never from files.
"""
from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Any

log = logging.getLogger(__name__)

ENV_PREFIX = "ONTOEXT_"


def load_config_file(path: str | Path | None) -> dict[str, str]:
    if path is None:
        return {}
    values: dict[str, str] = {}
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {number} is not key = value: {line!r}")
        key, _, value = stripped.partition("=")
        values[key.strip().lower()] = value.strip()
    return values


class Settings:
    """Resolved configuration view; remembers what was resolved for logging."""

    def __init__(self, file_values: dict[str, str] | None = None):
        self.file_values = file_values or {}
        self.resolved: dict[str, Any] = {}

    def get(self, key: str, flag_value: Any = None, default: Any = None,
            cast=None) -> Any:
        value: Any
        if flag_value is not None:
            value = flag_value
        else:
            env = os.environ.get(ENV_PREFIX + key.upper())
            if env is not None:
                value = env
            elif key in self.file_values:
                value = self.file_values[key]
            else:
                value = default
        if cast is not None and value is not None and not isinstance(value, cast):
            if cast is bool:
                value = str(value).strip().lower() in ("1", "true", "yes", "on")
            else:
                value = cast(value)
        self.resolved[key] = value
        return value

    def log_resolved(self) -> None:
        pairs = ", ".join(f"{k}={v!r}" for k, v in sorted(self.resolved.items()))
        log.info("resolved config: %s", pairs)
