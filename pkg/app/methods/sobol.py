"""
==========================
Methods - Sobol Decomposition
==========================

Sobol variance decomposition of a local gPC surrogate, effective dimensions and the
per-dimension refinement scores used by the splitter.

Variable subsets T ⊆ {0..d-1} are bitmasks (bit k set iff dimension k ∈ T), so d <= 63.
The contribution of T is the sum of the squared coefficients whose multi-index is non-zero
exactly on T.

Features:
- `SobolDecomposition`, `sobol_from_gpc`: σ²_T per subset and the total variance.
- `effective_dim_superposition`, `effective_dim_truncation`: effective dimensions at threshold α.
- `dimension_scores`: total (or first-order) Sobol variance per dimension.

Usage:
>>> from app.methods.sobol import sobol_from_gpc, dimension_scores
>>> dec = sobol_from_gpc(surrogate)
>>> dimension_scores(dec)

*Author: Sudharshan TK*\n
*Created: 2025-09-05*
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from app.helpers.errors import GpcError
from app.methods.gpc import GpcSurrogate

ScoreMode = Literal["total", "first_order"]
MAX_DIMENSION = 63


@dataclass(frozen=True)
class SobolDecomposition:
    """Local variance contributions σ²_{T,S}; absent subsets contribute 0."""

    stratum_id: int
    dimension: int
    total_variance: float
    contributions: dict[int, float] = field(default_factory=dict)

    def subset(self, mask: int) -> float:
        return self.contributions.get(mask, 0.0)

    def to_dict(self) -> dict:
        return {
            "stratum_id": self.stratum_id,
            "total_variance": self.total_variance,
            "contributions": {str(mask): value for mask, value in sorted(self.contributions.items())},
        }

    @classmethod
    def from_dict(cls, data: dict, dimension: int) -> SobolDecomposition:
        return cls(
            int(data["stratum_id"]),
            int(dimension),
            float(data["total_variance"]),
            {int(mask): float(value) for mask, value in data["contributions"].items()},
        )


def subset_masks(indices: np.ndarray) -> np.ndarray:
    """Bitmask of the non-zero components of every multi-index row."""
    d = indices.shape[1]
    if d > MAX_DIMENSION:
        raise GpcError(f"subset bitmasks support d <= {MAX_DIMENSION}, got {d}")
    weights = np.left_shift(np.ones(d, dtype=np.int64), np.arange(d, dtype=np.int64))
    return (indices > 0).astype(np.int64) @ weights


def sobol_from_gpc(surrogate: GpcSurrogate) -> SobolDecomposition:
    """
    Sobol decomposition read directly off the gPC coefficients: σ²_T = Σ_{m ∈ I_T} f_m²,
    where I_T holds the multi-indices with m_k > 0 exactly for k ∈ T.

    Args:
        surrogate (GpcSurrogate): Fitted local surrogate.

    Returns:
        SobolDecomposition: Non-zero contributions and their total.
    """
    masks = subset_masks(surrogate.index_set.indices)
    squares = np.asarray(surrogate.coefficients, dtype=float) ** 2

    grouped: dict[int, list[float]] = defaultdict(list)
    for mask, sq in zip(masks.tolist(), squares.tolist()):
        if mask != 0:
            grouped[mask].append(sq)

    contributions = {}
    for mask in sorted(grouped):
        value = math.fsum(grouped[mask])
        if value > 0.0:
            contributions[mask] = value
    total = math.fsum(sq for mask, sq in zip(masks.tolist(), squares.tolist()) if mask != 0)
    return SobolDecomposition(surrogate.stratum_id, surrogate.dimension, total, contributions)


def _threshold_reached(captured: float, dec: SobolDecomposition, alpha: float) -> bool:
    # relative slack so that alpha = 1 is reachable under rounding
    return captured >= alpha * dec.total_variance * (1.0 - 1e-12)


def _check_alpha(alpha: float):
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")


def effective_dim_superposition(dec: SobolDecomposition, alpha: float = 0.99) -> int:
    """
    Smallest interaction order s such that the subsets with |T| <= s carry at least α of the variance.

    Returns:
        int: d_sup, or 0 when the total variance is zero.
    """
    _check_alpha(alpha)
    if dec.total_variance <= 0.0:
        return 0
    by_order = defaultdict(list)
    for mask, value in dec.contributions.items():
        by_order[int(mask).bit_count()].append(value)
    captured = []
    for s in range(1, dec.dimension + 1):
        captured.extend(by_order.get(s, []))
        if _threshold_reached(math.fsum(captured), dec, alpha):
            return s
    return dec.dimension


def effective_dim_truncation(dec: SobolDecomposition, alpha: float = 0.99) -> int:
    """
    Smallest t such that the subsets of the leading variables {0..t-1} carry at least α of the variance.

    Returns:
        int: d_tr, or 0 when the total variance is zero.
    """
    _check_alpha(alpha)
    if dec.total_variance <= 0.0:
        return 0
    for t in range(1, dec.dimension + 1):
        limit = 1 << t
        captured = math.fsum(v for mask, v in dec.contributions.items() if mask < limit)
        if _threshold_reached(captured, dec, alpha):
            return t
    return dec.dimension


def dimension_scores(dec: SobolDecomposition, mode: ScoreMode = "total") -> np.ndarray:
    """
    Unnormalised per-dimension sensitivity used to choose the split direction.

    Args:
        dec (SobolDecomposition): Local decomposition.
        mode (ScoreMode, optional): "total" sums σ²_T over all T ∋ k; "first_order" uses σ²_{k} only.

    Returns:
        np.ndarray: d non-negative scores.
    """
    scores = np.zeros(dec.dimension)
    if mode == "total":
        for mask, value in dec.contributions.items():
            for k in range(dec.dimension):
                if mask >> k & 1:
                    scores[k] += value
    elif mode == "first_order":
        for k in range(dec.dimension):
            scores[k] = dec.subset(1 << k)
    else:
        raise ValueError(f"unknown score mode {mode!r}")
    return scores
