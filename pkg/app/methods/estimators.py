"""
==========================
Methods - Estimators
==========================

Stratified-LHS stage estimators, their variance estimates, the plain LHS / SMC baselines and
the optimally weighted ensemble of independent unbiased estimators.

A stage draws N̄ LHS points in every stratum (constant allocation), evaluates the model, and
per stratum records the sample mean, the Bessel-corrected sample standard deviation, a local
gPC fit and its Sobol decomposition. The stage estimate is μ̂ = Σ_S p_S · mean_S with variance
estimate v = Σ_S p_S² σ̂_S² / N_S = (1/N̄) Σ_S p_S² σ̂_S².

Stages are combined with weights α_ℓ ∝ 1/v_ℓ (variance 1/Σ 1/v_ℓ); a zero-variance stage takes
all the weight (the latest one if several qualify).

Features:
- `StratumStats`, `StageEstimate`, `BaselineEstimate`, `EnsembleEstimate`.
- `stage_estimate`, `stage_variance`.
- `optimal_weights`, `combine`.
- `smc_estimate`, `lhs_estimate`.

Usage:
>>> from app.methods.estimators import stage_estimate, optimal_weights, combine
>>> stage = stage_estimate(Stratification.trivial(2), model, nbar=50, stage=1, master_seed=7)
>>> ensemble = combine([stage], optimal_weights([stage.variance]))

*Author: Sudharshan TK*\n
*Created: 2025-09-06*
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import numpy as np

from app.helpers.errors import ConfigError, SamplingError
from app.logger import logger
from app.methods.gpc import BasisKind, GpcSurrogate, MultiIndexSet, fit_gpc, total_degree_index_set
from app.methods.model import Model, evaluate_checked
from app.methods.sampling import RngStream, derive_stream, lhs_sample, uniform_sample
from app.methods.sobol import SobolDecomposition, sobol_from_gpc
from app.methods.stratification import HyperRectangle, Stratification, Stratum
from app.workers import run_in_pool


@dataclass(frozen=True)
class StratumStats:
    """Per-stratum statistics of one stage."""

    stratum_id: int
    probability: float
    mean: float
    std: float
    n: int
    surrogate: GpcSurrogate
    sobol: SobolDecomposition


@dataclass(frozen=True)
class StageEstimate:
    """One S-LHS estimator μ̂_ℓ with its stratification and per-stratum statistics."""

    stage: int
    stratification: Stratification
    strata: tuple[StratumStats, ...]
    mean: float
    variance: float
    n_samples: int


@dataclass(frozen=True)
class BaselineEstimate:
    """Plain LHS or SMC estimate over the whole domain with its variance proxy s²/N."""

    method: str
    mean: float
    variance: float
    n_samples: int


@dataclass(frozen=True)
class EnsembleEstimate:
    """Weighted combination E_L(α) = Σ α_ℓ μ̂_ℓ of independent stage estimates."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    value: float
    variance: float


class _HasMoments(Protocol):
    mean: float
    variance: float


# =========================
# Stage estimator
# =========================


def _stratum_stats(stratum: Stratum, model: Model, nbar: int, stage: int, master_seed: int,
                   index_set: MultiIndexSet, basis: BasisKind) -> StratumStats:
    rng = derive_stream(master_seed, stage, stratum.id)
    batch = lhs_sample(stratum.rect, nbar, rng, stratum_id=stratum.id)
    values = evaluate_checked(model, batch.points)
    surrogate = fit_gpc(batch, values, stratum.rect, index_set, basis)
    return StratumStats(
        stratum_id=stratum.id,
        probability=stratum.probability,
        mean=float(np.mean(values)),
        std=float(np.std(values, ddof=1)),
        n=batch.size,
        surrogate=surrogate,
        sobol=sobol_from_gpc(surrogate),
    )


def stage_estimate(strat: Stratification, model: Model, nbar: int, stage: int, master_seed: int,
                   basis: BasisKind = "legendre", workers: int = 1,
                   index_set: Optional[MultiIndexSet] = None) -> StageEstimate:
    """
    Build the S-LHS estimator of one stage: an independent LHS of size N̄ per stratum
    (stream `derive_stream(master_seed, stage, stratum_id)`), local gPC fit and Sobol decomposition,
    then μ̂ = Σ p_S mean_S and v from `stage_variance`.

    Args:
        strat (Stratification): Stratification of this stage.
        model (Model): Function on [0,1]^d.
        nbar (int): Samples per stratum N̄ (>= 2).
        stage (int): Stage index ℓ.
        master_seed (int): Run seed.
        basis (BasisKind, optional): Local basis construction. Defaults to "legendre".
        workers (int, optional): Threads used for the per-stratum work. Defaults to 1.
        index_set (MultiIndexSet, optional): gPC truncation. Defaults to the total-degree set below N̄.

    Raises:
        ConfigError: N̄ < 2 or a model of the wrong dimension.
        ModelError: The model returned a non-finite value (the point is reported).

    Returns:
        StageEstimate: The stage estimate.
    """
    if nbar < 2:
        raise ConfigError(f"nbar must be >= 2, got {nbar}")
    if getattr(model, "dimension", strat.dimension) != strat.dimension:
        raise ConfigError(f"model dimension {model.dimension} does not match stratification dimension {strat.dimension}")
    if index_set is None:
        index_set = total_degree_index_set(strat.dimension, nbar)

    stats = run_in_pool(
        lambda s: _stratum_stats(s, model, nbar, stage, master_seed, index_set, basis),
        strat.strata, workers=workers, thread_name="StratumWorker",
    )
    mean = math.fsum(s.probability * s.mean for s in stats)
    estimate = StageEstimate(stage, strat, tuple(stats), mean, 0.0, nbar * len(strat))
    return StageEstimate(stage, strat, estimate.strata, mean, stage_variance(estimate), estimate.n_samples)


def stage_variance(stage: StageEstimate) -> float:
    """
    Conservative variance estimate of a stage: Σ_S p_S² σ̂_S² / N_S, which equals
    (1/N̄) Σ_S p_S² σ̂_S² under constant allocation.

    Returns:
        float: v_ℓ >= 0.
    """
    return math.fsum(s.probability ** 2 * s.std ** 2 / s.n for s in stage.strata)


# =========================
# Weighting
# =========================


def optimal_weights(variances: Sequence[float]) -> np.ndarray:
    """
    Variance-minimising weights of independent unbiased estimators.

    Args:
        variances (Sequence[float]): v_1..v_L, all >= 0.

    Raises:
        ValueError: Empty input, negative or non-finite variance.

    Returns:
        np.ndarray: α* with α*_ℓ = (1/v_ℓ) / Σ_j (1/v_j); when some v_k = 0, the selector of the
        latest such k.
    """
    v = np.asarray(variances, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValueError("optimal_weights needs at least one variance")
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise ValueError(f"variances must be finite and non-negative, got {v.tolist()}")

    zero = np.flatnonzero(v == 0.0)
    if zero.size:
        weights = np.zeros_like(v)
        weights[zero[-1]] = 1.0
        return weights

    inv = 1.0 / v
    return inv / math.fsum(inv)


def combine(stages: Sequence[_HasMoments], weights: Sequence[float]) -> EnsembleEstimate:
    """
    Weighted ensemble E_L(α) = Σ α_ℓ μ̂_ℓ with variance Σ α_ℓ² v_ℓ
    (= 1/Σ 1/v_ℓ for the optimal weights, 0 for the zero-variance selector).

    Args:
        stages (Sequence): Objects with `mean` and `variance` (stage or baseline estimates).
        weights (Sequence[float]): One weight per stage.

    Raises:
        ValueError: Length mismatch or empty input.

    Returns:
        EnsembleEstimate: The combined estimate.
    """
    w = np.asarray(weights, dtype=float).reshape(-1)
    if len(stages) == 0 or w.size != len(stages):
        raise ValueError(f"{w.size} weights for {len(stages)} stages")
    means = np.array([s.mean for s in stages], dtype=float)
    variances = np.array([s.variance for s in stages], dtype=float)
    value = math.fsum(w * means)
    variance = math.fsum(w * w * variances)
    return EnsembleEstimate(w, means, variances, value, variance)


# =========================
# Baselines
# =========================


def smc_estimate(model: Model, n: int, rng: RngStream) -> BaselineEstimate:
    """
    Standard Monte Carlo mean of n i.i.d. uniform draws on [0,1]^d.

    Raises:
        SamplingError: n < 2.
        ModelError: Non-finite model output.

    Returns:
        BaselineEstimate: Mean and the variance proxy s²/n.
    """
    if n < 2:
        raise SamplingError(f"SMC needs n >= 2, got {n}")
    batch = uniform_sample(HyperRectangle.unit(model.dimension), n, rng)
    values = evaluate_checked(model, batch.points)
    return BaselineEstimate("SMC", float(np.mean(values)), float(np.var(values, ddof=1)) / n, n)


def lhs_estimate(model: Model, n: int, rng: RngStream) -> BaselineEstimate:
    """
    Mean over one LHS design of size n on [0,1]^d (the S-LHS estimator with the trivial stratification).

    Raises:
        SamplingError: n < 1.
        ModelError: Non-finite model output.

    Returns:
        BaselineEstimate: Mean and the (conservative) variance proxy s²/n; 0 when n = 1.
    """
    batch = lhs_sample(HyperRectangle.unit(model.dimension), n, rng)
    values = evaluate_checked(model, batch.points)
    variance = float(np.var(values, ddof=1)) / n if n > 1 else 0.0
    logger.debug("LHS estimate over %d points: %.6g", n, float(np.mean(values)))
    return BaselineEstimate("LHS", float(np.mean(values)), variance, n)
