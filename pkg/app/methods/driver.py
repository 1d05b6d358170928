"""
==========================
Methods - Sequential Driver
==========================

The sequential refinement loop: start from the trivial stratification, build one stratified-LHS
stage estimate per stratification, bisect the single (stratum, dimension) pair contributing most
to the stage variance, and finally combine all stages with inverse-variance weights.

The trace is rewritten after every stage (atomic JSON), so an aborted run still leaves every
completed stage on disk with `status: "aborted"` and the error text.

Features:
- `RunConfig`: validated run parameters.
- `RefinementChoice`, `select_refinement`: argmax of p_S² · score_k(S) with a flagged fallback.
- `StageRecord`, `RunTrace`: JSON-serialisable run trace.
- `run_sequential`: the whole loop.

Usage:
>>> from app.methods.driver import RunConfig, run_sequential
>>> from app.bench.problems import ModelSpec
>>> config = RunConfig(dimension=2, stages=6, model=ModelSpec("p1", dimension=2, delta=0.1))
>>> ensemble, trace = run_sequential(config, trace_path="runs/Output/trace.json")

*Author: Sudharshan TK*\n
*Created: 2025-09-07*
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

import app.helpers.config as cfg
from app.bench.problems import ModelSpec, build_model
from app.helpers.errors import ConfigError
from app.helpers.general import write_json_atomic
from app.logger import logger
from app.methods.estimators import EnsembleEstimate, StageEstimate, combine, optimal_weights, stage_estimate
from app.methods.sobol import dimension_scores, effective_dim_superposition, effective_dim_truncation
from app.methods.stratification import Stratification, bisect

TRACE_SCHEMA = "sslhs-trace/1"
SCORE_MODES = ("total", "first_order")
BASES = ("legendre", "stieltjes")


@dataclass(frozen=True)
class RunConfig:
    """Inputs of one sequential run. Defaults come from `.config.yml`."""

    dimension: int
    stages: int = cfg.DEFAULT_STAGES
    nbar: int = cfg.DEFAULT_NBAR
    seed: int = cfg.DEFAULT_SEED
    score_mode: str = cfg.DEFAULT_SCORE_MODE
    alpha: float = cfg.DEFAULT_ALPHA
    basis: str = cfg.DEFAULT_BASIS
    model: Optional[ModelSpec] = None
    workers: int = 1

    def __post_init__(self):
        errors = []
        if self.dimension < 1:
            errors.append(f"dimension must be >= 1, got {self.dimension}")
        if self.stages < 1:
            errors.append(f"stages must be >= 1, got {self.stages}")
        if self.nbar < 2:
            errors.append(f"nbar must be >= 2, got {self.nbar}")
        if not 0 <= self.seed < 2**64:
            errors.append(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.score_mode not in SCORE_MODES:
            errors.append(f"score mode must be one of {SCORE_MODES}, got {self.score_mode!r}")
        if not 0.0 < self.alpha <= 1.0:
            errors.append(f"alpha must be in (0, 1], got {self.alpha}")
        if self.basis not in BASES:
            errors.append(f"basis must be one of {BASES}, got {self.basis!r}")
        if self.workers < 1:
            errors.append(f"workers must be >= 1, got {self.workers}")
        if self.model is not None and self.model.dimension != self.dimension:
            errors.append(f"model dimension {self.model.dimension} differs from run dimension {self.dimension}")
        if errors:
            raise ConfigError("invalid run config: " + "; ".join(errors))

    @property
    def total_samples(self) -> int:
        """N̄ · L(L+1)/2, since stage ℓ has exactly ℓ strata."""
        return self.nbar * self.stages * (self.stages + 1) // 2

    def to_dict(self) -> dict:
        data = asdict(self)
        data["model"] = None if self.model is None else self.model.to_dict()
        data.pop("workers")
        return data


# =========================
# Refinement
# =========================


@dataclass(frozen=True)
class RefinementChoice:
    stratum_id: int
    dimension: int
    score: float
    fallback: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def select_refinement(stage: StageEstimate, mode: str = "total") -> RefinementChoice:
    """
    Pick the (stratum, dimension) pair with the largest share of the stage variance.

    Each stratum contributes p_S² · σ̂_S² to the stage variance; its Sobol scores split that
    amount across dimensions, so dimension k of S scores p_S² · σ̂_S² · score_k / Σ_j score_j.
    Ties go to the lower stratum id, then the lower dimension. When every score is zero, the
    largest stratum is split along its longest edge (lowest id / dimension on ties) and the
    choice is flagged as a fallback.

    Args:
        stage (StageEstimate): Estimate whose Sobol decompositions drive the choice.
        mode (str, optional): "total" or "first_order" scores. Defaults to "total".

    Returns:
        RefinementChoice: The split to apply.
    """
    best: Optional[RefinementChoice] = None
    for stats in sorted(stage.strata, key=lambda s: s.stratum_id):
        scores = dimension_scores(stats.sobol, mode)
        total = math.fsum(scores.tolist())
        if total <= 0.0 or stats.std <= 0.0:
            continue
        weighted = stats.probability ** 2 * stats.std ** 2 * scores / total
        for k, score in enumerate(weighted.tolist()):
            if score > 0.0 and (best is None or score > best.score):
                best = RefinementChoice(stats.stratum_id, k, score)
    if best is not None:
        return best

    largest = max(sorted(stage.stratification, key=lambda s: s.id), key=lambda s: s.probability)
    longest = int(np.argmax(largest.rect.extent))
    logger.warning("Stage %d: all refinement scores vanish; splitting stratum %d along y%d",
                   stage.stage, largest.id, longest + 1)
    return RefinementChoice(largest.id, longest, 0.0, fallback=True)


# =========================
# Trace
# =========================


@dataclass
class StageRecord:
    stage: int
    stratification: dict
    mean: float
    variance: float
    n_samples: int
    split: Optional[dict]
    strata: list[dict]

    @classmethod
    def from_stage(cls, stage: StageEstimate, split: Optional[RefinementChoice], alpha: float) -> StageRecord:
        strata = []
        for s in stage.strata:
            strata.append({
                "stratum_id": s.stratum_id,
                "probability": s.probability,
                "mean": s.mean,
                "std": s.std,
                "n": s.n,
                "rank_deficient": s.surrogate.rank_deficient,
                "d_sup": effective_dim_superposition(s.sobol, alpha),
                "d_tr": effective_dim_truncation(s.sobol, alpha),
                "sobol": s.sobol.to_dict(),
            })
        return cls(
            stage=stage.stage,
            stratification=stage.stratification.to_dict(),
            mean=stage.mean,
            variance=stage.variance,
            n_samples=stage.n_samples,
            split=None if split is None else split.to_dict(),
            strata=strata,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> StageRecord:
        return cls(
            stage=int(data["stage"]),
            stratification=data["stratification"],
            mean=float(data["mean"]),
            variance=float(data["variance"]),
            n_samples=int(data["n_samples"]),
            split=data.get("split"),
            strata=list(data["strata"]),
        )


@dataclass
class RunTrace:
    """Everything one run produced. Contains no wall-clock data, so equal configs give equal traces."""

    config: dict
    stages: list[StageRecord] = field(default_factory=list)
    weights: list[float] = field(default_factory=list)
    estimate: Optional[float] = None
    variance: Optional[float] = None
    total_samples: int = 0
    status: str = "running"
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "schema": TRACE_SCHEMA,
            "status": self.status,
            "error": self.error,
            "config": self.config,
            "stages": [s.to_dict() for s in self.stages],
            "weights": self.weights,
            "estimate": self.estimate,
            "variance": self.variance,
            "total_samples": self.total_samples,
        }

    @classmethod
    def from_dict(cls, data: dict) -> RunTrace:
        if not isinstance(data, dict) or data.get("schema") != TRACE_SCHEMA:
            found = data.get("schema") if isinstance(data, dict) else type(data).__name__
            raise ConfigError(f"not a trace document (schema {found!r}, expected {TRACE_SCHEMA!r})")
        try:
            return cls(
                config=data["config"],
                stages=[StageRecord.from_dict(s) for s in data["stages"]],
                weights=[float(w) for w in data["weights"]],
                estimate=data["estimate"],
                variance=data["variance"],
                total_samples=int(data["total_samples"]),
                status=data["status"],
                error=data.get("error"),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"malformed trace document: {e}") from e

    def stratification(self, stage: int) -> Stratification:
        return Stratification.from_dict(self.stages[stage - 1].stratification)


def _persist(trace: RunTrace, trace_path, surrogates: list, surrogates_path):
    if trace_path is not None:
        write_json_atomic(trace_path, trace.to_dict())
    if surrogates_path is not None:
        write_json_atomic(surrogates_path, surrogates)


# =========================
# Loop
# =========================


def run_sequential(config: RunConfig, model=None, trace_path: Optional[str | Path] = None,
                   surrogates_path: Optional[str | Path] = None) -> tuple[EnsembleEstimate, RunTrace]:
    """
    Run L stages of stratified LHS with gPC/Sobol-driven bisection and combine them.

    Args:
        config (RunConfig): Run parameters.
        model (Model, optional): Model to integrate. Defaults to `build_model(config.model)`.
        trace_path (str | Path, optional): Trace JSON, rewritten after every stage.
        surrogates_path (str | Path, optional): JSON dump of every stratum's gPC coefficients.

    Raises:
        ConfigError: No model given.
        ModelError / NumericalError: Propagated after the aborted trace is written.

    Returns:
        tuple[EnsembleEstimate, RunTrace]: Weighted estimate and trace.
    """
    owned = False
    if model is None:
        if config.model is None:
            raise ConfigError("run_sequential needs a model or a model spec")
        model = build_model(config.model)
        owned = True

    trace = RunTrace(config=config.to_dict())
    surrogates: list[dict] = []
    stages: list[StageEstimate] = []
    strat = Stratification.trivial(config.dimension)

    try:
        for ell in range(1, config.stages + 1):
            logger.debug("Stage %d: %d strata, %d samples", ell, len(strat), config.nbar * len(strat))
            stage = stage_estimate(strat, model, config.nbar, ell, config.seed,
                                   basis=config.basis, workers=config.workers)
            stages.append(stage)
            surrogates.extend({"stage": ell, **s.surrogate.to_dict()} for s in stage.strata)

            split = select_refinement(stage, config.score_mode) if ell < config.stages else None
            trace.stages.append(StageRecord.from_stage(stage, split, config.alpha))
            trace.total_samples += stage.n_samples
            logger.info("Stage %d: mean %.10g, variance %.6g, N %d%s", ell, stage.mean, stage.variance,
                        stage.n_samples, "" if split is None else
                        f", split stratum {split.stratum_id} along y{split.dimension + 1}")
            _persist(trace, trace_path, surrogates, surrogates_path)

            if split is not None:
                strat = bisect(strat, split.stratum_id, split.dimension)

        weights = optimal_weights([s.variance for s in stages])
        ensemble = combine(stages, weights)
        trace.weights = weights.tolist()
        trace.estimate = ensemble.value
        trace.variance = ensemble.variance
        trace.status = "complete"
        _persist(trace, trace_path, surrogates, surrogates_path)
    except Exception as e:
        trace.status = "aborted"
        trace.error = f"{type(e).__name__}: {e}"
        logger.error("Run aborted after %d stage(s): %s", len(trace.stages), trace.error)
        try:
            _persist(trace, trace_path, surrogates, surrogates_path)
        except Exception:
            logger.exception("Failed to write aborted trace")
        raise
    finally:
        if owned and hasattr(model, "close"):
            model.close()

    if not math.isclose(math.fsum(trace.weights), 1.0, rel_tol=0.0, abs_tol=1e-12):
        logger.warning("Stage weights sum to %.17g", math.fsum(trace.weights))
    return ensemble, trace
