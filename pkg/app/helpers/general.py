"""
==========================
Helpers - General Operations
==========================

This module provides general helper functions for the application, including directory management
and atomic JSON writes for trace and report artifacts.

Features:
- `ensure_dirs`: Ensure all necessary directories exist by creating them if they do not.
- `write_json_atomic`: Write a JSON document through a temp file + `os.replace`.
- `read_json`: Read a JSON document.


Usage:
>>> from app.helpers.general import ensure_dirs, write_json_atomic
>>> ensure_dirs()  # Ensure all necessary directories exist
>>> write_json_atomic("runs/Output/trace.json", {"stages": []})

*Author: Sudharshan TK*\n
*Created: 2025-08-24*
"""

import json
import os
from pathlib import Path

import app.helpers.config as cfg
from app.logger import logger


def ensure_dirs() -> None:
    """
    Ensure all necessary directories exist by creating them if they do not.

    Returns:
        None
    """
    for d in cfg.MAIN_PATHS:
        os.makedirs(d, exist_ok=True)


def write_json_atomic(path: str | os.PathLike, data) -> None:
    """
    Write `data` as JSON to `path` atomically: the document is written to a sibling
    `.tmp` file first and then moved over the target, so readers never see a half-written file.

    Args:
        path (str | PathLike): Target file.
        data: JSON-serialisable document.
    """
    path = Path(path)
    if path.parent:
        os.makedirs(path.parent, exist_ok=True)
    tmp = str(path) + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=1, allow_nan=True)
            f.write("\n")
        os.replace(tmp, path)
    except Exception:
        try:
            if os.path.exists(tmp):
                os.remove(tmp)
        except Exception:
            logger.exception("Failed to remove temp file %s", tmp)
        raise


def read_json(path: str | os.PathLike):
    """
    Read a JSON document.

    Args:
        path (str | PathLike): File to read.

    Returns:
        Any: The decoded document.
    """
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
