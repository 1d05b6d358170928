"""
==========================
Helpers - Configurations
==========================

This module provides the default configuration of the estimator, the benchmark harness and the
logging / artifact folders.

Features:
- Loads configuration from a YAML file (`.config.yml`, or the file named by `SSLHS_CONFIG`).
- Falls back to built-in defaults for every key the file does not set.
- Defines paths for the log and output folders.
- Defines the estimator defaults (N̄ = 50, α = 0.99) and the benchmark defaults (schedule, replications).


Usage:
>>> import app.helpers.config as cfg
>>> print(cfg.DEFAULT_NBAR)  # Per-stratum sample budget

*Author: Sudharshan TK*\n
*Created: 2025-08-24*
"""

import os
from pathlib import Path

import yaml

# =========================
# CONFIG
# =========================

CONFIG_ENV = "SSLHS_CONFIG"
SEED_ENV = "SSLHS_SEED"

_DEFAULTS = {
    "app": {"name": "sslhs-gpc"},
    "paths": {"base_dir": "./runs"},
    "logging": {"level": "INFO"},
    "estimator": {
        "nbar": 50,
        "stages": 6,
        "alpha": 0.99,
        "score_mode": "total",
        "basis": "legendre",
        "seed": 20240601,
    },
    "bench": {"schedule": [6, 20, 63], "reps": 100, "workers": 1, "blackbox_timeout": 300},
}


def _merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path: str | os.PathLike | None = None) -> dict:
    """
    Load the YAML configuration and merge it over the built-in defaults.

    Args:
        path (str | PathLike, optional): Config file. Defaults to `$SSLHS_CONFIG` or `.config.yml`.

    Returns:
        dict: The merged configuration.
    """
    cfg_path = Path(path or os.environ.get(CONFIG_ENV, ".config.yml"))
    if not cfg_path.is_file():
        return _merge(_DEFAULTS, {})
    with open(cfg_path, "r", encoding="utf-8") as f:
        return _merge(_DEFAULTS, yaml.safe_load(f) or {})


cfg = load_config()

# App Name
APP_NAME = cfg["app"]["name"]

# Main Dirs
BASE_DIR = Path(cfg["paths"]["base_dir"])
LOG_FOLDER = Path(os.path.join(BASE_DIR, "Logs"))
OUTPUT_DIR = Path(os.path.join(BASE_DIR, "Output"))

# All Paths Arrays
MAIN_PATHS = [BASE_DIR, LOG_FOLDER, OUTPUT_DIR]

# Logging Configs
LOG_LEVEL = str(cfg["logging"]["level"]).upper()

# Estimator Configs
DEFAULT_NBAR = int(cfg["estimator"]["nbar"])
DEFAULT_STAGES = int(cfg["estimator"]["stages"])
DEFAULT_ALPHA = float(cfg["estimator"]["alpha"])
DEFAULT_SCORE_MODE = str(cfg["estimator"]["score_mode"])
DEFAULT_BASIS = str(cfg["estimator"]["basis"])
DEFAULT_SEED = int(cfg["estimator"]["seed"])

# Bench Configs
DEFAULT_SCHEDULE = [int(s) for s in cfg["bench"]["schedule"]]
DEFAULT_REPS = int(cfg["bench"]["reps"])
DEFAULT_WORKERS = int(cfg["bench"]["workers"])
# seconds a blackbox model may take per response; null or 0 waits forever
BLACKBOX_TIMEOUT = float(cfg["bench"]["blackbox_timeout"] or 0) or None
