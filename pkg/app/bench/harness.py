"""
==========================
Bench - Replication Harness
==========================

Measures estimator variance by independent replication and fits convergence slopes.

Every method at a comparison point uses the same total sample count N = N̄·L(L+1)/2: the
sequential estimator runs L stages, plain LHS and SMC draw N points at once. Replication r uses
the seed `replication_seed(seed, r)`; estimates are reduced by replication index, so results do
not depend on which worker ran what.

Features:
- `ConvergenceRecord`: mean and variance of R replicated estimates of one method at one N.
- `replicate`: R replications of one method (thread pool + tqdm progress bar).
- `convergence_study`: records over an L schedule plus log-log slopes per method.
- `PRESETS` / `preset_cases`: the P1, P2 and P3 case lists of the reference experiments.
- `records_frame` / `write_records_csv`: `method,problem,params,d,N,R,mean,variance` tables.

Usage:
>>> from app.bench.harness import convergence_study, write_records_csv
>>> study = convergence_study(config, schedule=[6, 20, 63], reps=100, workers=4)
>>> write_records_csv(study.records, "runs/Output/convergence_p1.csv")

*Author: Sudharshan TK*\n
*Created: 2025-09-08*
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from app.bench.problems import ModelSpec, build_model
from app.helpers.errors import ConfigError
from app.logger import logger
from app.methods.driver import RunConfig, run_sequential
from app.methods.estimators import lhs_estimate, smc_estimate
from app.methods.sampling import baseline_stream, replication_seed
from app.workers import run_in_pool

SSLHS = "SS-LHS-gPC"
LHS = "LHS"
SMC = "SMC"
METHODS = (SSLHS, LHS, SMC)
CSV_COLUMNS = ["method", "problem", "params", "d", "N", "R", "mean", "variance"]


@dataclass(frozen=True)
class ConvergenceRecord:
    method: str
    problem: str
    params: str
    d: int
    N: int
    R: int
    mean: float
    variance: float

    def __post_init__(self):
        if self.R < 2:
            raise ConfigError(f"a record needs R >= 2 replications, got {self.R}")
        if self.variance < 0:
            raise ValueError(f"negative variance {self.variance}")


@dataclass(frozen=True)
class StudyResult:
    records: list[ConvergenceRecord]
    slopes: dict[str, float]


def _moments(estimates: Sequence[float]) -> tuple[float, float]:
    # fsum is exactly rounded, so the result is independent of the estimate order
    n = len(estimates)
    mean = math.fsum(estimates) / n
    variance = math.fsum((x - mean) ** 2 for x in estimates) / (n - 1)
    return mean, variance


def _one_replication(config: RunConfig, method: str, model, r: int) -> float:
    seed = replication_seed(config.seed, r)
    n = config.total_samples
    if method == SSLHS:
        ensemble, _ = run_sequential(replace(config, seed=seed, workers=1), model)
        return ensemble.value
    if method == LHS:
        return lhs_estimate(model, n, baseline_stream(seed, 0)).mean
    if method == SMC:
        return smc_estimate(model, n, baseline_stream(seed, 1)).mean
    raise ConfigError(f"unknown method {method!r} (expected one of {', '.join(METHODS)})")


def replicate(config: RunConfig, method: str, reps: int, workers: int = 1, model=None,
              progress: bool = True) -> ConvergenceRecord:
    """
    Run `reps` independent replications of one method and record the sample mean and the
    unbiased sample variance of the estimates.

    Args:
        config (RunConfig): Run parameters; N is derived from its stages and N̄.
        method (str): "SS-LHS-gPC", "LHS" or "SMC".
        reps (int): Replication count R (>= 2).
        workers (int, optional): Replications run concurrently. Defaults to 1.
        model (Model, optional): Model to integrate. Defaults to `build_model(config.model)`.
        progress (bool, optional): Show a tqdm progress bar on stderr. Defaults to True.

    Raises:
        ConfigError: R < 2, unknown method or no model.

    Returns:
        ConvergenceRecord: One row of the convergence table.
    """
    if reps < 2:
        raise ConfigError(f"replications must be >= 2, got {reps}")
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r} (expected one of {', '.join(METHODS)})")

    owned = model is None
    if owned:
        if config.model is None:
            raise ConfigError("replicate needs a model or a model spec")
        model = build_model(config.model)

    n = config.total_samples
    bar = tqdm(total=reps, desc=f"{method} N={n}", unit="rep", disable=not progress, leave=False)
    try:
        estimates = run_in_pool(
            lambda r: _one_replication(config, method, model, r),
            range(reps), workers=workers, thread_name="ReplicationWorker", on_done=bar.update,
        )
    finally:
        bar.close()
        if owned and hasattr(model, "close"):
            model.close()

    mean, variance = _moments(estimates)
    spec = config.model
    record = ConvergenceRecord(
        method=method,
        problem=spec.kind if spec else "custom",
        params=spec.params if spec else "",
        d=config.dimension,
        N=n,
        R=reps,
        mean=mean,
        variance=variance,
    )
    logger.info("%s N=%d R=%d: mean %.10g, variance %.6g", method, n, reps, mean, variance)
    return record


def fit_slope(records: Sequence[ConvergenceRecord]) -> float:
    """
    Least-squares slope of log10(variance) against log10(N); nan with fewer than two
    points of positive variance.
    """
    pts = [(r.N, r.variance) for r in records if r.variance > 0]
    if len({n for n, _ in pts}) < 2:
        return math.nan
    x = np.log10([n for n, _ in pts])
    y = np.log10([v for _, v in pts])
    return float(np.polyfit(x, y, 1)[0])


def convergence_study(config: RunConfig, schedule: Sequence[int], reps: int,
                      methods: Sequence[str] = METHODS, workers: int = 1, model=None,
                      progress: bool = True) -> StudyResult:
    """
    One `ConvergenceRecord` per (stage count, method) pair, plus the fitted slope per method.

    Args:
        config (RunConfig): Base run parameters; `stages` is replaced by each schedule entry.
        schedule (Sequence[int]): Stage counts L (N = N̄·L(L+1)/2).
        reps (int): Replications per record.
        methods (Sequence[str], optional): Methods to compare. Defaults to all three.
        workers (int, optional): Concurrent replications. Defaults to 1.
        model (Model, optional): Model to integrate. Defaults to `build_model(config.model)`.
        progress (bool, optional): Show progress bars. Defaults to True.

    Returns:
        StudyResult: Records in schedule order and slopes keyed by method.
    """
    if not schedule:
        raise ConfigError("the stage schedule is empty")
    owned = model is None
    if owned:
        if config.model is None:
            raise ConfigError("convergence_study needs a model or a model spec")
        model = build_model(config.model)

    records = []
    try:
        for stages in schedule:
            run_config = replace(config, stages=int(stages))
            for method in methods:
                records.append(replicate(run_config, method, reps, workers, model, progress))
    finally:
        if owned and hasattr(model, "close"):
            model.close()

    slopes = {m: fit_slope([r for r in records if r.method == m]) for m in methods}
    for method, slope in slopes.items():
        logger.info("%s: fitted log-log slope %.3f", method, slope)
    return StudyResult(records, slopes)


# =========================
# Presets
# =========================

PRESETS: dict[str, list[ModelSpec]] = {
    "p1-delta": [ModelSpec("p1", 2, a=0.3, delta=delta) for delta in (1.0, 0.1, 0.01)],
    "p2-dims": [ModelSpec("p2", d, dprime=dp, radius=0.4) for dp, d in ((2, 2), (2, 3), (2, 10), (3, 3), (3, 4), (3, 10))],
    "p3-dims": [ModelSpec("p3", d, dprime=2, radius=0.4, radius2=0.4) for d in (4, 5, 10)],
}


def preset_cases(name: str) -> list[ModelSpec]:
    try:
        return list(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r} (expected one of {', '.join(PRESETS)})") from None


def case_label(spec: ModelSpec) -> str:
    """File-name friendly label of a case, e.g. `p1_a0.3_delta0.01` or `p2_dprime2_d10`."""
    if spec.kind == "p1":
        return f"p1_a{spec.a:g}_delta{spec.delta:g}"
    if spec.kind in ("p2", "p3"):
        return f"{spec.kind}_dprime{spec.dprime}_d{spec.dimension}"
    return f"{spec.kind}_d{spec.dimension}"


# =========================
# CSV
# =========================


def records_frame(records: Sequence[ConvergenceRecord]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in records], columns=CSV_COLUMNS)


def write_records_csv(records: Sequence[ConvergenceRecord], path: str | os.PathLike) -> Path:
    """Write the convergence table with a dot decimal separator and a fixed column order."""
    path = Path(path)
    os.makedirs(path.parent, exist_ok=True)
    records_frame(records).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path
