"""Environment-driven settings.

Values come from the process environment, optionally seeded from an
``rct.env`` file in the working directory.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

from .errors import ConfigError

ENV_FILE = "rct.env"

FALLBACK_STRATEGIES = ("mincut", "bnb")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass(frozen=True)
class Settings:
    log_level: str = "WARNING"
    dp_max_frontier: int = 12
    bnb_node_limit: int = 2_000_000
    fallback_strategy: str = "mincut"
    oracle_chunk: int = 262_144


def _int_setting(key: str, default: int, minimum: int) -> int:
    raw = os.getenv(key)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw.replace("_", ""))
    except ValueError as exc:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from exc
    if value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {value}")
    return value


def _choice_setting(key: str, default: str, choices: tuple[str, ...]) -> str:
    value = (os.getenv(key) or default).strip()
    normalised = value.upper() if choices is LOG_LEVELS else value.lower()
    if normalised not in choices:
        raise ConfigError(f"{key} must be one of {', '.join(choices)}, got {value!r}")
    return normalised


def load_settings(env_file: Path | str = ENV_FILE) -> Settings:
    load_dotenv(env_file)
    defaults = Settings()
    return Settings(
        log_level=_choice_setting("RCT_LOG_LEVEL", defaults.log_level, LOG_LEVELS),
        dp_max_frontier=_int_setting("RCT_DP_MAX_FRONTIER", defaults.dp_max_frontier, 0),
        bnb_node_limit=_int_setting("RCT_BNB_NODE_LIMIT", defaults.bnb_node_limit, 1),
        fallback_strategy=_choice_setting(
            "RCT_FALLBACK_STRATEGY", defaults.fallback_strategy, FALLBACK_STRATEGIES
        ),
        oracle_chunk=_int_setting("RCT_ORACLE_CHUNK", defaults.oracle_chunk, 1),
    )
