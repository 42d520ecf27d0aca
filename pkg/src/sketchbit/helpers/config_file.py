#!/usr/bin/env python3
import os
import logging
import argparse
from pathlib import Path
from typing import Any, Dict, Optional

from sketchbit.errors import SketchBitIOError, SketchBitUsageError

logger = logging.getLogger("sketchbit.helpers.config")

CONFIG_ENV_VAR = "SKETCHBIT_CONFIG"


class ConfigFileException(SketchBitIOError):
    """Unreadable or malformed configuration file"""

    pass


class ConfigKeyException(SketchBitUsageError):
    """Configuration key unknown to the command, or value of the wrong type"""

    pass


def resolve_config_path(explicit: Optional[str]) -> Optional[Path]:
    """Config path from the flag, else from SKETCHBIT_CONFIG, else none"""
    candidate = explicit or os.environ.get(CONFIG_ENV_VAR)
    if not candidate:
        return None
    logger.debug(f"Using config file: {candidate}")
    return Path(candidate)


def load_config(path: Path) -> Dict[str, str]:
    """Read a flat `key = value` file; `#` starts a comment"""
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        logger.error(f"Cannot read config file {path}: {e}")
        raise ConfigFileException(f"Cannot read config file {path}: {e}")

    values: Dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigFileException(
                f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}"
            )
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigFileException(f"{path}:{lineno}: empty key")
        values[key.replace("-", "_")] = value

    logger.debug(f"Loaded {len(values)} config entries from {path}")
    return values


def apply_config_defaults(
    parser: argparse.ArgumentParser, config: Dict[str, str]
) -> None:
    """Install config values as parser defaults so explicit flags still win"""
    actions = {
        action.dest: action
        for action in parser._actions
        if action.option_strings and action.dest not in ("help", "config")
    }
    converted: Dict[str, Any] = {}
    for key, value in config.items():
        action = actions.get(key)
        if action is None:
            raise ConfigKeyException(f"Unknown config key for {parser.prog}: {key}")
        converted[key] = _convert(action, key, value)
    parser.set_defaults(**converted)


def _convert(action: argparse.Action, key: str, value: str) -> Any:
    if action.nargs == 0:
        lowered = value.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigKeyException(f"Config key {key} expects a boolean, got {value!r}")

    convert = action.type if callable(action.type) else str
    try:
        if action.nargs in ("+", "*"):
            return [convert(item) for item in value.replace(",", " ").split()]
        result = convert(value)
    except (TypeError, ValueError, argparse.ArgumentTypeError) as e:
        raise ConfigKeyException(f"Config key {key}: {e}")

    if action.choices is not None and result not in action.choices:
        raise ConfigKeyException(
            f"Config key {key} must be one of {sorted(action.choices)}, got {value!r}"
        )
    return result
