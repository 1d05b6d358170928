"""
==========================
Methods - Model Interface
==========================

The contract between the estimators and whatever function is being integrated: a model knows its
input dimension and maps an (n, d) array of points in [0,1]^d to n real values.

Usage:
>>> from app.methods.model import evaluate_checked
>>> values = evaluate_checked(model, points)

*Author: Sudharshan TK*\n
*Created: 2025-09-05*
"""

from typing import Protocol, runtime_checkable

import numpy as np

from app.helpers.errors import ModelError


@runtime_checkable
class Model(Protocol):
    dimension: int

    def __call__(self, points: np.ndarray) -> np.ndarray:
        ...


def evaluate_checked(model: Model, points: np.ndarray) -> np.ndarray:
    """
    Evaluate `model` at the rows of `points` and reject non-finite output.

    Raises:
        ModelError: Wrong output shape, or a non-finite value (the offending point is reported).

    Returns:
        np.ndarray: Values of length n.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.asarray(model(pts), dtype=float).reshape(-1)
    if values.shape[0] != pts.shape[0]:
        raise ModelError(f"model returned {values.shape[0]} values for {pts.shape[0]} points")
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise ModelError(f"model returned non-finite value {values[bad[0]]}", point=pts[bad[0]])
    return values
