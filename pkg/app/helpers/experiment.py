"""
==========================
Helpers - Experiment Files
==========================

Declarative experiment descriptions for the CLI. An experiment file is a flat YAML (`.yml`,
`.yaml`) or TOML (`.toml`) document whose keys mirror the CLI flags:

    problem = "p2"          # p1 | p2 | p3 | blackbox
    d = 10
    dprime = 2
    radius = 0.4
    stages = 6              # run
    schedule = [6, 20, 63]  # convergence
    nbar = 50
    reps = 100
    seed = 7
    methods = ["SS-LHS-gPC", "LHS", "SMC"]
    out = "runs/Output/p2"

Files are validated before any sampling happens; unknown keys and wrongly typed values are
rejected with a `ConfigError`. Precedence when resolving a setting: CLI flag, then experiment file,
then `.config.yml` defaults.

Usage:
>>> from app.helpers.experiment import load_experiment
>>> experiment = load_experiment("experiments/p2_dims.toml")
>>> experiment.resolve("nbar", None, 50)

*Author: Sudharshan TK*\n
*Created: 2025-09-08*
"""

from __future__ import annotations

import os
import tomllib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import yaml

from app.helpers.errors import ConfigError

_INT_KEYS = {"d", "dprime", "stages", "nbar", "reps", "seed", "workers"}
_FLOAT_KEYS = {"a", "delta", "radius", "radius2", "c", "alpha"}
_STR_KEYS = {"problem", "blackbox_cmd", "out", "score_mode", "basis", "preset", "surrogates"}
_LIST_KEYS = {"schedule": int, "methods": str}


@dataclass(frozen=True)
class ExperimentFile:
    """Validated experiment settings; keys absent from the file are None."""

    problem: Optional[str] = None
    d: Optional[int] = None
    dprime: Optional[int] = None
    a: Optional[float] = None
    delta: Optional[float] = None
    radius: Optional[float] = None
    radius2: Optional[float] = None
    c: Optional[float] = None
    blackbox_cmd: Optional[str] = None
    stages: Optional[int] = None
    schedule: Optional[list[int]] = None
    nbar: Optional[int] = None
    reps: Optional[int] = None
    seed: Optional[int] = None
    workers: Optional[int] = None
    score_mode: Optional[str] = None
    alpha: Optional[float] = None
    basis: Optional[str] = None
    methods: Optional[list[str]] = None
    preset: Optional[str] = None
    out: Optional[str] = None
    surrogates: Optional[str] = None
    source: Optional[str] = field(default=None, compare=False)

    def resolve(self, key: str, flag: Any, default: Any) -> Any:
        """CLI flag if given, else the file's value, else `default`."""
        if flag is not None:
            return flag
        value = getattr(self, key)
        return default if value is None else value


def _coerce(key: str, value: Any) -> Any:
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return value
    if key in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        return float(value)
    if key in _STR_KEYS:
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}")
        return value
    item_type = _LIST_KEYS[key]
    if not isinstance(value, list) or not all(isinstance(v, item_type) and not isinstance(v, bool) for v in value):
        raise ConfigError(f"{key} must be a list of {item_type.__name__}, got {value!r}")
    return list(value)


def parse_experiment(data: dict, source: Optional[str] = None) -> ExperimentFile:
    """
    Validate a decoded experiment document.

    Raises:
        ConfigError: Not a mapping, unknown keys or wrongly typed values.
    """
    if not isinstance(data, dict):
        raise ConfigError(f"experiment file {source or ''} must contain a mapping, got {type(data).__name__}")
    known = {f.name for f in fields(ExperimentFile)} - {"source"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown experiment keys: {', '.join(map(str, unknown))}")
    values = {key: _coerce(key, value) for key, value in data.items() if value is not None}
    return ExperimentFile(**values, source=source)


def load_experiment(path: str | os.PathLike) -> ExperimentFile:
    """
    Read and validate an experiment file (YAML or TOML, chosen by extension).

    Raises:
        ConfigError: Missing file, unsupported extension, parse error or invalid content.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"experiment file not found: {path}")
    suffix = path.suffix.lower()
    try:
        if suffix == ".toml":
            with open(path, "rb") as f:
                data = tomllib.load(f)
        elif suffix in (".yml", ".yaml"):
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        else:
            raise ConfigError(f"unsupported experiment file type {suffix!r} (use .toml, .yml or .yaml)")
    except (tomllib.TOMLDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    return parse_experiment(data, str(path))
