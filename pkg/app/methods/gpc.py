"""
==========================
Methods - Generalized Polynomial Chaos
==========================

Local orthonormal polynomial bases on hyperrectangles and least-squares estimation of the
gPC coefficients of a function from the samples of one stratum.

One-dimensional bases are described by the recurrence coefficients (α_j, β_j) of the
orthonormal three-term recurrence w.r.t. the uniform density on [a, b]:

    sqrt(β_{j+1}) ψ_{j+1}(y) = (y - α_j) ψ_j(y) - sqrt(β_j) ψ_{j-1}(y),   ψ_0 = 1/sqrt(β_0).

They come either from the affinely rescaled Legendre recurrence or from the discretised
Stieltjes procedure on Gauss–Legendre nodes; both give the same coefficients.
Evaluation maps each coordinate to [-1, 1] first.

Features:
- `Basis1D`, `legendre_basis`, `stieltjes_basis`: 1D orthonormal bases.
- `MultiIndexSet`, `total_degree_index_set`: total-degree truncation below a sample budget.
- `GpcSurrogate`, `evaluate_surrogate`, `fit_gpc`: tensor-product surrogate and its LS fit.

Usage:
>>> from app.methods.gpc import total_degree_index_set, fit_gpc
>>> index_set = total_degree_index_set(2, 50)
>>> surrogate = fit_gpc(batch, values, rect, index_set)
>>> surrogate.mean

*Author: Sudharshan TK*\n
*Created: 2025-09-05*
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from scipy.linalg import lstsq, qr, solve_triangular
from scipy.special import comb

from app.helpers.errors import GpcError, SamplingError
from app.logger import logger
from app.methods.sampling import SampleBatch
from app.methods.stratification import HyperRectangle, contains_many

BasisKind = Literal["legendre", "stieltjes"]


# =========================
# 1D bases
# =========================


@dataclass(frozen=True, eq=False)
class Basis1D:
    """Orthonormal polynomials ψ_0..ψ_p w.r.t. the uniform density on `interval`."""

    interval: tuple[float, float]
    max_degree: int
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def center(self) -> float:
        return 0.5 * (self.interval[0] + self.interval[1])

    @property
    def half_width(self) -> float:
        return 0.5 * (self.interval[1] - self.interval[0])

    def evaluate(self, y) -> np.ndarray:
        """
        Evaluate ψ_0..ψ_p at the points `y`.

        Args:
            y (array-like): Points in the interval.

        Returns:
            np.ndarray: Array of shape (len(y), max_degree + 1).
        """
        c, h = self.center, self.half_width
        t = (np.asarray(y, dtype=float).reshape(-1) - c) / h
        # recurrence coefficients of the same polynomials in the reference variable t
        alpha = (self.alpha - c) / h
        sqrt_beta = np.sqrt(self.beta)
        sqrt_beta[1:] /= h

        out = np.empty((t.shape[0], self.max_degree + 1))
        out[:, 0] = 1.0 / sqrt_beta[0]
        if self.max_degree >= 1:
            out[:, 1] = (t - alpha[0]) * out[:, 0] / sqrt_beta[1]
        for j in range(1, self.max_degree):
            out[:, j + 1] = ((t - alpha[j]) * out[:, j] - sqrt_beta[j] * out[:, j - 1]) / sqrt_beta[j + 1]
        return out


def _check_interval(interval, max_degree: int) -> tuple[float, float]:
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise GpcError(f"degenerate interval [{a}, {b}]")
    if max_degree < 0:
        raise GpcError(f"max_degree must be >= 0, got {max_degree}")
    return a, b


def legendre_basis(interval, max_degree: int) -> Basis1D:
    """
    Orthonormal Legendre basis on [a, b] from the analytic recurrence rescaled to the interval:
    α_j = (a+b)/2, β_0 = 1, β_j = h² j² / (4j² - 1) with h = (b-a)/2.

    Args:
        interval (tuple[float, float]): [a, b] with a < b.
        max_degree (int): Highest polynomial degree.

    Raises:
        GpcError: Degenerate interval or negative degree.

    Returns:
        Basis1D: The basis.
    """
    a, b = _check_interval(interval, max_degree)
    h = 0.5 * (b - a)
    j = np.arange(max_degree + 1, dtype=float)
    beta = np.ones(max_degree + 1)
    beta[1:] = h * h * j[1:] ** 2 / (4.0 * j[1:] ** 2 - 1.0)
    alpha = np.full(max_degree + 1, 0.5 * (a + b))
    return Basis1D((a, b), max_degree, alpha, beta)


def stieltjes_basis(interval, max_degree: int, quadrature_order: Optional[int] = None) -> Basis1D:
    """
    Orthonormal basis on [a, b] from the discretised Stieltjes procedure. Inner products are
    Gauss–Legendre sums against the uniform probability density, carried out in the reference
    variable t ∈ [-1, 1] with normalised polynomials and mapped back to [a, b].

    Args:
        interval (tuple[float, float]): [a, b] with a < b.
        max_degree (int): Highest polynomial degree.
        quadrature_order (int, optional): Number of Gauss nodes, at least max_degree + 1.
            Defaults to max_degree + 1.

    Raises:
        GpcError: Degenerate interval or insufficient quadrature order.

    Returns:
        Basis1D: The basis.
    """
    a, b = _check_interval(interval, max_degree)
    order = max_degree + 1 if quadrature_order is None else int(quadrature_order)
    if order < max_degree + 1:
        raise GpcError(f"quadrature order {order} is below max_degree + 1 = {max_degree + 1}")

    t, w = np.polynomial.legendre.leggauss(order)
    w = w / 2.0

    alpha = np.zeros(max_degree + 1)
    beta = np.zeros(max_degree + 1)
    beta[0] = w.sum()
    q_prev = np.zeros_like(t)
    q = np.full_like(t, 1.0 / np.sqrt(beta[0]))
    for j in range(max_degree + 1):
        alpha[j] = np.sum(w * t * q * q)
        if j == max_degree:
            break
        r = (t - alpha[j]) * q - np.sqrt(beta[j]) * q_prev
        beta[j + 1] = np.sum(w * r * r)
        q_prev, q = q, r / np.sqrt(beta[j + 1])

    c, h = 0.5 * (a + b), 0.5 * (b - a)
    beta[1:] *= h * h
    return Basis1D((a, b), max_degree, c + h * alpha, beta)


def make_basis(interval, max_degree: int, kind: BasisKind = "legendre") -> Basis1D:
    if kind == "legendre":
        return legendre_basis(interval, max_degree)
    if kind == "stieltjes":
        return stieltjes_basis(interval, max_degree)
    raise GpcError(f"unknown basis kind {kind!r}")


# =========================
# Index sets
# =========================


@dataclass(frozen=True, eq=False)
class MultiIndexSet:
    """Downward-closed set of multi-indices, graded by total degree (zero index first)."""

    dimension: int
    indices: np.ndarray

    def __len__(self) -> int:
        return self.indices.shape[0]

    @property
    def max_degrees(self) -> np.ndarray:
        return self.indices.max(axis=0)

    @property
    def total_degree(self) -> int:
        return int(self.indices.sum(axis=1).max())

    def position(self, index) -> int:
        """Row of `index` in the set, or -1."""
        hits = np.flatnonzero(np.all(self.indices == np.asarray(index), axis=1))
        return int(hits[0]) if hits.size else -1


def _indices_of_degree(d: int, q: int):
    # stars and bars: compositions of q into d non-negative parts, lexicographically descending
    for bars in itertools.combinations(range(q + d - 1), d - 1):
        parts, prev = [], -1
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(q + d - 1 - prev - 1)
        yield tuple(parts)


def total_degree_index_set(d: int, budget: int) -> MultiIndexSet:
    """
    All multi-indices with |m|_1 <= p, for the largest p whose cardinality C(p+d, d) stays
    strictly below the per-stratum sample budget N̄.

    Args:
        d (int): Dimension (>= 1).
        budget (int): Sample budget N̄ (>= 2).

    Raises:
        GpcError: If d < 1 or budget < 2.

    Returns:
        MultiIndexSet: The index set; only the zero index (with a warning) when N̄ <= d + 1.
    """
    if d < 1:
        raise GpcError(f"dimension must be >= 1, got {d}")
    if budget < 2:
        raise GpcError(f"index budget must be >= 2, got {budget}")

    p = 0
    while comb(p + 1 + d, d, exact=True) < budget:
        p += 1
    if p == 0:
        logger.warning("Budget %d admits no first-order terms in d=%d: degenerate constant surrogate", budget, d)

    rows = [m for q in range(p + 1) for m in sorted(_indices_of_degree(d, q), reverse=True)]
    return MultiIndexSet(d, np.array(rows, dtype=int).reshape(-1, d))


# =========================
# Surrogates
# =========================


@dataclass(frozen=True, eq=False)
class GpcSurrogate:
    """Local gPC expansion of one stratum: index set, coefficients and per-dimension bases."""

    stratum_id: int
    index_set: MultiIndexSet
    coefficients: np.ndarray
    bases: tuple[Basis1D, ...]
    rank_deficient: bool = False
    residual: float = 0.0
    diagnostics: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.coefficients) != len(self.index_set):
            raise GpcError(
                f"{len(self.coefficients)} coefficients for an index set of size {len(self.index_set)}")

    @property
    def dimension(self) -> int:
        return self.index_set.dimension

    @property
    def mean(self) -> float:
        """The zero-index coefficient, i.e. the surrogate's mean over the stratum."""
        pos = self.index_set.position(np.zeros(self.dimension, dtype=int))
        return float(self.coefficients[pos]) if pos >= 0 else 0.0

    @property
    def variance(self) -> float:
        pos = self.index_set.position(np.zeros(self.dimension, dtype=int))
        mask = np.ones(len(self.coefficients), dtype=bool)
        if pos >= 0:
            mask[pos] = False
        return float(np.sum(self.coefficients[mask] ** 2))

    def to_dict(self) -> dict:
        return {
            "stratum_id": self.stratum_id,
            "indices": self.index_set.indices.tolist(),
            "coefficients": self.coefficients.tolist(),
            "rank_deficient": self.rank_deficient,
        }


def local_bases(rect: HyperRectangle, index_set: MultiIndexSet, kind: BasisKind = "legendre") -> tuple[Basis1D, ...]:
    """One basis per dimension of `rect`, up to the highest degree the index set uses there."""
    degrees = index_set.max_degrees
    return tuple(
        make_basis((rect.lower[k], rect.upper[k]), int(degrees[k]), kind)
        for k in range(rect.dimension)
    )


def design_matrix(bases: tuple[Basis1D, ...], index_set: MultiIndexSet, points: np.ndarray) -> np.ndarray:
    """
    Tensor-product basis evaluated at `points`: Ψ[j, i] = Π_k ψ_{k, m_ik}(y_jk).

    Returns:
        np.ndarray: (n, |index set|) matrix.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    psi = np.ones((pts.shape[0], len(index_set)))
    for k, basis in enumerate(bases):
        values = basis.evaluate(pts[:, k])
        psi *= values[:, index_set.indices[:, k]]
    return psi


def evaluate_surrogate(surrogate: GpcSurrogate, rect: HyperRectangle, point) -> float | np.ndarray:
    """
    Evaluate Σ_m f_m Π_k ψ_{k,m_k}(y_k) at one point or at the rows of an (n, d) array.

    Raises:
        GpcError: If a point lies outside the stratum.

    Returns:
        float | np.ndarray: Scalar for a single point, array for several.
    """
    pts = np.asarray(point, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    inside = contains_many(rect, pts)
    if not inside.all():
        raise GpcError(f"point {pts[~inside][0].tolist()} lies outside stratum {surrogate.stratum_id}")
    values = design_matrix(surrogate.bases, surrogate.index_set, pts) @ surrogate.coefficients
    return float(values[0]) if single else values


def fit_gpc(batch: SampleBatch, values, rect: HyperRectangle, index_set: MultiIndexSet,
            basis: BasisKind = "legendre") -> GpcSurrogate:
    """
    Least-squares gPC coefficients of one stratum from its own sample batch.

    The design matrix is factorised by column-pivoted QR; a numerically rank-deficient matrix
    falls back to the SVD-based minimum-norm solution and the surrogate is flagged.

    Args:
        batch (SampleBatch): Points of the stratum.
        values (array-like): Model values at the batch points.
        rect (HyperRectangle): The stratum.
        index_set (MultiIndexSet): Truncation.
        basis (BasisKind, optional): "legendre" or "stieltjes". Defaults to "legendre".

    Raises:
        GpcError: Non-finite values or mismatched sizes.

    Returns:
        GpcSurrogate: The fitted surrogate.
    """
    y = np.asarray(values, dtype=float).reshape(-1)
    if y.shape[0] != batch.size:
        raise GpcError(f"{y.shape[0]} values for {batch.size} points")
    if not np.all(np.isfinite(y)):
        raise GpcError(f"non-finite model values in stratum {batch.stratum_id}")
    if batch.points.shape[1] != index_set.dimension:
        raise SamplingError(
            f"batch dimension {batch.points.shape[1]} does not match index set dimension {index_set.dimension}")

    bases = local_bases(rect, index_set, basis)
    psi = design_matrix(bases, index_set, batch.points)
    n, k = psi.shape
    diagnostics = []

    q_mat, r_mat, piv = qr(psi, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r_mat))
    tol = max(n, k) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))

    rank_deficient = rank < k
    if rank_deficient:
        coef, _, rank, _ = lstsq(psi, y, lapack_driver="gelsd")
        diagnostics.append(f"rank-deficient design matrix (rank {rank} of {k}); minimum-norm solution used")
        logger.warning("Stratum %s: rank-deficient design matrix (rank %d of %d)", batch.stratum_id, rank, k)
    else:
        coef = np.empty(k)
        coef[piv] = solve_triangular(r_mat, q_mat.T @ y)

    if not np.all(np.isfinite(coef)):
        raise GpcError(f"non-finite gPC coefficients in stratum {batch.stratum_id}")

    residual = float(np.sum((psi @ coef - y) ** 2))
    return GpcSurrogate(batch.stratum_id, index_set, coef, bases, rank_deficient, residual, tuple(diagnostics))
