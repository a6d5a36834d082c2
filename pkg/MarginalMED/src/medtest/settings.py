#!/usr/bin/env python3
"""
Settings: packaged JSON defaults, an optional user JSON file, then
environment overrides named <PREFIX>_<SECTION>_<KEY>, for example
MED_SMOOTHER_H_X=0.15 or MED_TEST_N_JOBS=4.
"""

import copy
import json
import logging
import os
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from .errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULTS_PATH = Path(__file__).parent / "config" / "defaults.json"

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _read_json(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except UnicodeDecodeError:
        raise ConfigError(f"{path} is not UTF-8 text")
    except json.JSONDecodeError as e:
        raise ConfigError(f"error decoding {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return data


def _merge(base: dict, update: Mapping) -> dict:
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
    return base


def _coerce(raw: str, default: Any, name: str) -> Any:
    """Convert an environment string to the type of the JSON default."""
    try:
        if isinstance(default, bool):
            lowered = raw.strip().lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, str):
            return raw
        return json.loads(raw)
    except ValueError:
        raise ConfigError(f"cannot read {name}={raw!r} as {type(default).__name__}")


def env_var_name(prefix: str, section: str, key: str) -> str:
    parts = [prefix.upper()] if prefix else []
    parts += [section.upper(), key.upper()]
    return "_".join(parts)


def apply_env_overrides(settings: dict, environ: Optional[Mapping[str, str]] = None) -> dict:
    environ = os.environ if environ is None else environ
    prefix = settings.get("environment", {}).get("prefix", "")

    for section, values in settings.items():
        # Skip the environment block itself and any non-section entries
        if section == "environment" or not isinstance(values, dict):
            continue
        for key, default in values.items():
            name = env_var_name(prefix, section, key)
            if name in environ:
                values[key] = _coerce(environ[name], default, name)
                logger.debug("override %s = %r", name, values[key])
    return settings


def load_settings(config_path: Optional[Union[str, Path]] = None,
                  environ: Optional[Mapping[str, str]] = None) -> dict:
    """Defaults, merged with the user file when given, then environment overrides."""
    settings = copy.deepcopy(_read_json(DEFAULTS_PATH))
    if config_path is not None:
        _merge(settings, _read_json(Path(config_path)))
    return apply_env_overrides(settings, environ)
