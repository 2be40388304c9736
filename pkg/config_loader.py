"""
Configuration for the starshape command line.

Handles:
- CliConfig: validated, immutable view of the parsed flags
- STARSHAPE_LOG: log level from the environment
- Logging setup for the entry point

There is no configuration file; flags and one environment variable are all
a run depends on.
"""

import logging
import math
import sys
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Tuple

LOG_ENV_VAR = "STARSHAPE_LOG"
DEFAULT_LOG_LEVEL = "warn"
LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}
LOG_FORMAT = '[%(asctime)s] %(levelname)s: %(message)s'


class ConfigError(Exception):
    """Raised when a flag or environment value is invalid."""
    pass


@dataclass(frozen=True)
class CliConfig:
    command: str
    inputs: Tuple[str, ...] = ()
    candidates: Tuple[str, ...] = ()
    measure: Optional[str] = None
    order: Optional[str] = None
    property_name: Optional[str] = None
    representation: Optional[str] = None
    mode: str = "ssd"
    regime: str = "star"
    kind: Optional[str] = None
    beta: Optional[float] = None
    d_b: Optional[float] = None
    d_u: Optional[float] = None
    rho_z: Optional[float] = None
    rho_zero: float = 0.0
    trials: int = 500
    seed: int = 0
    tolerance: float = 1e-9
    output: Optional[str] = None
    log_level: str = DEFAULT_LOG_LEVEL


def resolve_log_level(environ: Mapping[str, str]) -> str:
    """Read STARSHAPE_LOG; unset or empty means the default level.

    Raises:
        ConfigError: If the value is not one of error, warn, info, debug
    """
    level = environ.get(LOG_ENV_VAR, "").strip().lower() or DEFAULT_LOG_LEVEL
    if level not in LOG_LEVELS:
        raise ConfigError(f"{LOG_ENV_VAR} must be one of {', '.join(LOG_LEVELS)} (got: {level!r})")
    return level


def configure_logging(level: str) -> None:
    """Send log records to stderr at the given level; stdout carries only JSON."""
    logging.basicConfig(level=LOG_LEVELS[level], format=LOG_FORMAT, stream=sys.stderr, force=True)


def build_cli_config(namespace: Any, environ: Mapping[str, str]) -> CliConfig:
    """Validate parsed arguments and the environment into a CliConfig.

    Args:
        namespace: argparse.Namespace (missing attributes take CliConfig defaults)
        environ: Environment mapping, normally os.environ

    Returns:
        Validated configuration

    Raises:
        ConfigError: If any value is out of range
    """
    values = {
        name: getattr(namespace, name)
        for name in CliConfig.__dataclass_fields__
        if getattr(namespace, name, None) is not None
    }
    values["log_level"] = resolve_log_level(environ)
    for key in ("inputs", "candidates"):
        if key in values:
            values[key] = tuple(values[key])
    config = CliConfig(**values)

    _validate_min_int(config.trials, "trials", 1)
    _validate_min_int(config.seed, "seed", 0)
    _validate_positive_float(config.tolerance, "tolerance")
    if config.beta is not None:
        _validate_level(config.beta, "beta")
    for name in ("d_b", "d_u", "rho_z", "rho_zero"):
        value = getattr(config, name)
        if value is not None:
            _validate_finite(value, name)
    if config.d_b is not None and config.d_b < 0:
        raise ConfigError(f"'d_b' must be non-negative (got: {config.d_b})")
    if config.d_b is not None and config.d_u is not None and config.d_b > config.d_u:
        raise ConfigError(f"'d_b' must not exceed 'd_u' (got: {config.d_b} > {config.d_u})")

    logging.debug("Configuration: %s", config)
    return config


def _validate_min_int(value: Any, key: str, minimum: int) -> None:
    """Validate that a value is an integer of at least minimum."""
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"'{key}' must be an integer >= {minimum} (got: {value})")


def _validate_positive_float(value: Any, key: str) -> None:
    if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
        raise ConfigError(f"'{key}' must be a positive number (got: {value})")


def _validate_level(value: Any, key: str) -> None:
    """Validate that a value is a probability level in [0, 1]."""
    if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
        raise ConfigError(f"'{key}' must lie in [0, 1] (got: {value})")


def _validate_finite(value: Any, key: str) -> None:
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"'{key}' must be a finite number (got: {value})")
