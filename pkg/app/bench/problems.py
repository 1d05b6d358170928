"""
==========================
Bench - Test Problems
==========================

The three benchmark integrands on [0,1]^d and their reference values.

    P1: f(y) = 1 / (|a - y1² - y2²| + δ)                              d = 2
    P2: f(y) = c · 1{Σ_{m<d'} y_m² <= r²}                             d >= d'
    P3: f(y) = c · (1{Σ_{m<d'} y_m² <= r1²} + 1{Σ_{d'<=m<2d'} y_m² <= r2²})   d >= 2d'

P2/P3 means are ball-octant volumes (closed form for d' <= 3, r < 1). P1 moments come from
tensor Gauss-Legendre quadrature split along the ridge y1² + y2² = a, so both pieces are smooth.

Features:
- `ModelSpec`: validated description of a model (problem kind, parameters, dimension).
- `P1Model`, `P2Model`, `P3Model` and the scalar/array evaluators `eval_p1`, `eval_p2`, `eval_p3`.
- `analytic_mean`, `p1_moments`: reference values.
- `build_model`: model object for a spec (black-box specs start a child process).

Usage:
>>> from app.bench.problems import ModelSpec, build_model, analytic_mean
>>> spec = ModelSpec("p2", dimension=2, dprime=2, radius=0.4)
>>> model = build_model(spec)
>>> analytic_mean(spec)
0.12566370614359174

*Author: Sudharshan TK*\n
*Created: 2025-09-07*
"""

from __future__ import annotations

import math
import shlex
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from app.helpers.errors import ConfigError

PROBLEMS = ("p1", "p2", "p3", "blackbox")


@dataclass(frozen=True)
class ModelSpec:
    """
    Which function to integrate. Only the parameters of the chosen kind are used; c defaults to 1
    for P2/P3 and only rescales variances.
    """

    kind: str
    dimension: int
    a: float = 0.3
    delta: float = 1.0
    dprime: int = 2
    radius: float = 0.4
    radius2: float = 0.4
    c: float = 1.0
    command: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", str(self.kind).lower())
        errors = self.problems()
        if errors:
            raise ConfigError("invalid model spec: " + "; ".join(errors))

    def problems(self) -> list[str]:
        errors = []
        if self.kind not in PROBLEMS:
            errors.append(f"unknown problem {self.kind!r} (expected one of {', '.join(PROBLEMS)})")
            return errors
        if self.dimension < 1:
            errors.append(f"dimension must be >= 1, got {self.dimension}")
        if self.kind == "p1":
            if self.dimension != 2:
                errors.append(f"P1 requires d = 2, got {self.dimension}")
            if not self.delta > 0:
                errors.append(f"P1 requires delta > 0, got {self.delta}")
        elif self.kind in ("p2", "p3"):
            blocks = 1 if self.kind == "p2" else 2
            if self.dprime < 1:
                errors.append(f"d' must be >= 1, got {self.dprime}")
            elif self.dimension < blocks * self.dprime:
                errors.append(f"{self.kind.upper()} requires d >= {blocks}·d' = {blocks * self.dprime}, got {self.dimension}")
            radii = (self.radius,) if self.kind == "p2" else (self.radius, self.radius2)
            if any(not r > 0 for r in radii):
                errors.append(f"radii must be > 0, got {radii}")
        elif not self.command:
            errors.append("blackbox models need a command")
        return errors

    @property
    def params(self) -> str:
        """Compact parameter label used in CSV rows and report headers."""
        if self.kind == "p1":
            return f"a={self.a:g};delta={self.delta:g}"
        if self.kind == "p2":
            return f"dprime={self.dprime};r={self.radius:g};c={self.c:g}"
        if self.kind == "p3":
            return f"dprime={self.dprime};r1={self.radius:g};r2={self.radius2:g};c={self.c:g}"
        return f"cmd={self.command}"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> ModelSpec:
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(f"malformed model spec: {e}") from e


# =========================
# Evaluators
# =========================


def _as_points(y, d: int) -> tuple[np.ndarray, bool]:
    pts = np.asarray(y, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] < d:
        raise ConfigError(f"points have {pts.shape[1]} coordinates, need at least {d}")
    return pts, single


def _ball(pts: np.ndarray, start: int, stop: int, radius: float) -> np.ndarray:
    return np.sum(pts[:, start:stop] ** 2, axis=1) <= radius ** 2


def eval_p1(y, a: float = 0.3, delta: float = 1.0):
    """1/(|a - y1² - y2²| + δ) at one point or at the rows of an (n, 2) array."""
    pts, single = _as_points(y, 2)
    values = 1.0 / (np.abs(a - pts[:, 0] ** 2 - pts[:, 1] ** 2) + delta)
    return float(values[0]) if single else values


def eval_p2(y, dprime: int = 2, r: float = 0.4, c: float = 1.0):
    """c if the leading d' coordinates lie in the closed ball of radius r, else 0."""
    pts, single = _as_points(y, dprime)
    values = c * _ball(pts, 0, dprime, r).astype(float)
    return float(values[0]) if single else values


def eval_p3(y, dprime: int = 2, r1: float = 0.4, r2: float = 0.4, c: float = 1.0):
    """Sum of two ball indicators over the disjoint blocks [0, d') and [d', 2d'), scaled by c."""
    pts, single = _as_points(y, 2 * dprime)
    values = c * (_ball(pts, 0, dprime, r1).astype(float) + _ball(pts, dprime, 2 * dprime, r2).astype(float))
    return float(values[0]) if single else values


@dataclass(frozen=True)
class P1Model:
    a: float = 0.3
    delta: float = 1.0
    dimension: int = field(default=2, init=False)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return eval_p1(np.atleast_2d(points), self.a, self.delta)


@dataclass(frozen=True)
class P2Model:
    dimension: int
    dprime: int = 2
    radius: float = 0.4
    c: float = 1.0

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return eval_p2(np.atleast_2d(points), self.dprime, self.radius, self.c)


@dataclass(frozen=True)
class P3Model:
    dimension: int
    dprime: int = 2
    radius: float = 0.4
    radius2: float = 0.4
    c: float = 1.0

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return eval_p3(np.atleast_2d(points), self.dprime, self.radius, self.radius2, self.c)


def build_model(spec: ModelSpec):
    """
    Model object for `spec`. Black-box models own a child process; close them (or use them as a
    context manager) when done.
    """
    if spec.kind == "p1":
        return P1Model(spec.a, spec.delta)
    if spec.kind == "p2":
        return P2Model(spec.dimension, spec.dprime, spec.radius, spec.c)
    if spec.kind == "p3":
        return P3Model(spec.dimension, spec.dprime, spec.radius, spec.radius2, spec.c)

    from app.bench.blackbox import BlackboxModel

    return BlackboxModel(shlex.split(spec.command), spec.dimension)


# =========================
# Reference values
# =========================


def ball_octant_volume(dprime: int, radius: float) -> float:
    """
    Volume of {y in [0,1]^d' : |y| <= r} for r < 1 and d' <= 3 (the ball's positive orthant).

    Raises:
        ConfigError: r >= 1 or d' > 3 (no closed form used here).
    """
    if not 0 < radius < 1:
        raise ConfigError(f"closed-form ball volume needs 0 < r < 1, got {radius}")
    if dprime == 1:
        return radius
    if dprime == 2:
        return math.pi * radius ** 2 / 4.0
    if dprime == 3:
        return math.pi * radius ** 3 / 6.0
    raise ConfigError(f"closed-form ball volume only for d' <= 3, got {dprime}")


def p1_moments(a: float = 0.3, delta: float = 1.0, order: int = 64) -> tuple[float, float]:
    """
    Mean and variance of P1 over [0,1]² by Gauss-Legendre quadrature.

    The inner integral over y2 is split at sqrt(a - y1²) and the outer one at sqrt(a),
    so every panel integrates a smooth function.

    Returns:
        tuple[float, float]: (E f, Var f).
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)

    def panel(lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
        half = 0.5 * (hi - lo)
        return lo + half * (nodes + 1.0), half * weights

    def inner(y1: float, power: int) -> float:
        cuts = [0.0, 1.0]
        if y1 * y1 < a:
            kink = math.sqrt(a - y1 * y1)
            if 0.0 < kink < 1.0:
                cuts = [0.0, kink, 1.0]
        total = []
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            y2, w = panel(lo, hi)
            total.append(float(np.sum(w * eval_p1(np.column_stack([np.full_like(y2, y1), y2]), a, delta) ** power)))
        return math.fsum(total)

    outer_cuts = [0.0, 1.0]
    if 0.0 < a < 1.0:
        outer_cuts = [0.0, math.sqrt(a), 1.0]

    moments = []
    for power in (1, 2):
        total = []
        for lo, hi in zip(outer_cuts[:-1], outer_cuts[1:]):
            y1, w = panel(lo, hi)
            total.append(math.fsum(wi * inner(float(yi), power) for yi, wi in zip(y1, w)))
        moments.append(math.fsum(total))
    mean, second = moments
    return mean, second - mean * mean


def analytic_mean(spec: ModelSpec) -> float:
    """
    Reference mean of a benchmark problem: closed form for P2/P3, quadrature for P1.

    Raises:
        ConfigError: Black-box models, or parameters without a closed form.
    """
    if spec.kind == "p1":
        return p1_moments(spec.a, spec.delta)[0]
    if spec.kind == "p2":
        return spec.c * ball_octant_volume(spec.dprime, spec.radius)
    if spec.kind == "p3":
        return spec.c * (ball_octant_volume(spec.dprime, spec.radius) + ball_octant_volume(spec.dprime, spec.radius2))
    raise ConfigError("black-box models have no reference mean")
