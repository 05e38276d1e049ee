#!/usr/bin/env python3
"""Configuration module for crossover-optim"""

import json
import os
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .matlib import Tolerance

CONFIG_FILE = "config/crossover-config.json"
THREADS_ENV = "CROSSOVER_OPTIM_THREADS"

DEFAULTS = {
    "rank_tol": 1e-10,
    "eq_tol": 1e-8,
    "r_grid": "0.05:0.95:0.05",
    "rho_grid": None,
    "enumeration_cap": 10 ** 7,
    "sample_count": 100000,
    "search_top": 5,
    "chunk_size": 4096,
    "threads": 1,
    "log_dir": "logs",
}

INTEGER_KEYS = ("enumeration_cap", "sample_count", "search_top", "chunk_size", "threads")

R_ENDPOINTS = (0.01, 0.99)

# magnitudes used with both signs when no rho grid is configured
DEFAULT_RHO_MAGNITUDES = (0.01,) + tuple(round(0.05 * k, 2) for k in range(1, 20)) + (0.99,)


def load_config(path=None, require_full_config=False):
    """
    Load configuration from JSON file, merged over DEFAULTS.

    Args:
        path: Config file path (default: CONFIG_FILE)
        require_full_config: If True, a missing file is an error.
                           If False, DEFAULTS are returned (for tests and ad-hoc runs)
    """
    config_path = Path(path or CONFIG_FILE)
    config = dict(DEFAULTS)
    if not config_path.exists():
        if require_full_config or path is not None:
            raise InvalidInputError(f"Configuration file '{config_path}' not found")
        return config

    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            loaded = json.load(f)
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"Invalid JSON in {config_path}: {e}") from e
    except OSError as e:
        raise InvalidInputError(f"Failed to load {config_path}: {e}") from e

    if not isinstance(loaded, dict):
        raise InvalidInputError(f"{config_path}: top level must be a JSON object")
    unknown = sorted(set(loaded) - set(DEFAULTS))
    if unknown:
        raise InvalidInputError(f"{config_path}: unknown configuration keys {unknown}")
    for key in INTEGER_KEYS:
        if key in loaded:
            value = loaded[key]
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidInputError(f"{config_path}: '{key}' must be a positive integer, got {value!r}")
    config.update(loaded)
    return config


def get_tolerance(config):
    """Tolerance from config values; invalid values are input errors."""
    try:
        return Tolerance(rank_tol=float(config["rank_tol"]), eq_tol=float(config["eq_tol"]))
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"invalid tolerance in configuration: {e}") from e


def get_thread_limit(config):
    """Worker count; the environment variable caps the configured value."""
    try:
        threads = int(config.get("threads", 1))
    except (TypeError, ValueError):
        raise InvalidInputError(f"threads must be an integer, got {config.get('threads')!r}") from None
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise InvalidInputError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if cap < 1:
            raise InvalidInputError(f"{THREADS_ENV} must be >= 1, got {cap}")
        threads = min(threads, cap)
    return max(threads, 1)


def parse_grid(text):
    """'a:b:step' -> sorted values a, a+step, ..., b inside (0, 1)."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise InvalidInputError(f"grid must look like a:b:step, got {text!r}")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError:
        raise InvalidInputError(f"grid must look like a:b:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise InvalidInputError(f"grid {text!r} needs step > 0 and b >= a")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    values = [round(start + k * step, 12) for k in range(count)]
    if values[0] <= 0.0 or values[-1] >= 1.0:
        raise InvalidInputError(f"grid {text!r} must lie strictly inside (0, 1)")
    return values


def mirror_signs(magnitudes):
    return sorted({-m for m in magnitudes} | {m for m in magnitudes})


def default_rho_grid():
    """Symmetric rho grid: +-0.01, +-0.05, ..., +-0.95, +-0.99."""
    return mirror_signs(DEFAULT_RHO_MAGNITUDES)


def get_r_grid(config):
    return parse_grid(config["r_grid"])


def with_endpoints(grid):
    """`grid` plus r = 0.01 and 0.99, the edges the default rho grid also reaches."""
    return sorted(set(grid) | set(R_ENDPOINTS))


def get_rho_grid(config):
    if config.get("rho_grid") is None:
        return default_rho_grid()
    return mirror_signs(parse_grid(config["rho_grid"]))
