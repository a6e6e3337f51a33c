"""Setting resolution for the CLI: flags > TTR_* environment > config file > defaults."""

from __future__ import annotations

import os
from pathlib import Path

ENV_PREFIX = "TTR_"


def load_config_file(path: str | Path | None) -> dict[str, str]:
    """Parse a key=value config file; blank lines and #-comments ignored."""
    if path is None:
        return {}
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}: line {lineno}: expected key=value")
            key, _, value = stripped.partition("=")
            values[key.strip()] = value.strip()
    return values


def resolve(name: str, flag_value, file_values: dict[str, str], default, cast=str):
    """Resolve one setting by precedence. `flag_value` is None when not given."""
    if flag_value is not None:
        return flag_value
    env_value = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if env_value is not None:
        return cast(env_value)
    if name in file_values:
        return cast(file_values[name])
    return default
