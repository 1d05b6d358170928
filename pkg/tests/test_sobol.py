import itertools
import math

import numpy as np
import pytest

from app.methods.gpc import GpcSurrogate, MultiIndexSet, fit_gpc, local_bases, total_degree_index_set
from app.methods.sampling import derive_stream, lhs_sample
from app.methods.sobol import (SobolDecomposition, dimension_scores, effective_dim_superposition,
                               effective_dim_truncation, sobol_from_gpc)
from app.methods.stratification import HyperRectangle


def surrogate(indices, coefficients, rect=None):
    index_set = MultiIndexSet(len(indices[0]), np.array(indices, dtype=int))
    rect = rect or HyperRectangle.unit(index_set.dimension)
    return GpcSurrogate(0, index_set, np.array(coefficients, dtype=float), local_bases(rect, index_set))


def fitted(fn, d=2, budget=10, rect=None, n=50):
    rect = rect or HyperRectangle.unit(d)
    batch = lhs_sample(rect, n, derive_stream(5, 1, 0))
    return fit_gpc(batch, fn(batch.points), rect, total_degree_index_set(d, budget))


def test_contributions_follow_index_patterns():
    c0, a, b, e = 1.5, 0.3, -0.2, 0.7
    dec = sobol_from_gpc(surrogate([(0, 0), (1, 0), (2, 0), (1, 1)], [c0, a, b, e]))
    assert dec.subset(0b01) == pytest.approx(a * a + b * b)
    assert dec.subset(0b11) == pytest.approx(e * e)
    assert dec.subset(0b10) == 0.0
    assert dec.total_variance == pytest.approx(a * a + b * b + e * e)
    assert math.fsum(dec.contributions.values()) == pytest.approx(dec.total_variance, rel=1e-15)


def test_additive_function_splits_variance_evenly():
    dec = sobol_from_gpc(fitted(lambda y: y[:, 0] + y[:, 1]))
    assert dec.subset(0b01) == pytest.approx(1 / 12, abs=1e-10)
    assert dec.subset(0b10) == pytest.approx(1 / 12, abs=1e-10)
    assert dec.subset(0b11) == pytest.approx(0.0, abs=1e-10)
    assert np.allclose(dimension_scores(dec), [1 / 12, 1 / 12], atol=1e-10)


def test_constant_surrogate_has_empty_decomposition():
    dec = sobol_from_gpc(surrogate([(0, 0), (1, 0)], [4.0, 0.0]))
    assert dec.contributions == {}
    assert dec.total_variance == 0.0
    assert effective_dim_superposition(dec) == 0
    assert effective_dim_truncation(dec) == 0
    assert np.array_equal(dimension_scores(dec), np.zeros(2))


def dec_of(d, contributions):
    return SobolDecomposition(0, d, math.fsum(contributions.values()), contributions)


@pytest.mark.parametrize("alpha", [0.5, 0.99, 1.0])
def test_additive_superposition_dimension_is_one(alpha):
    assert effective_dim_superposition(dec_of(4, {1: 0.2, 2: 0.3, 8: 0.5}), alpha) == 1


@pytest.mark.parametrize("alpha, expected", [(0.99, 2), (0.5, 1)])
def test_superposition_threshold(alpha, expected):
    assert effective_dim_superposition(dec_of(2, {0b01: 0.5, 0b11: 0.5}), alpha) == expected


def test_truncation_dimension():
    assert effective_dim_truncation(dec_of(5, {1 << 4: 1.0})) == 5
    assert effective_dim_truncation(dec_of(10, {0b01: 0.4, 0b10: 0.6})) == 2


def test_two_block_structure():
    # g(y1, y2) + h(y3, y4) embedded in d = 10
    dec = dec_of(10, {0b0001: 0.3, 0b0010: 0.3, 0b0011: 0.1, 0b0100: 0.3, 0b1000: 0.3, 0b1100: 0.1})
    assert effective_dim_superposition(dec, 0.99) == 2
    assert effective_dim_truncation(dec, 0.99) == 4


def test_alpha_out_of_range():
    with pytest.raises(ValueError):
        effective_dim_superposition(dec_of(2, {1: 1.0}), 0.0)
    with pytest.raises(ValueError):
        effective_dim_truncation(dec_of(2, {1: 1.0}), 1.5)


def test_interaction_counts_in_every_member_dimension():
    e2 = 0.49
    dec = dec_of(2, {0b11: e2})
    assert np.allclose(dimension_scores(dec), [e2, e2])
    assert np.allclose(dimension_scores(dec, "first_order"), [0.0, 0.0])


def test_first_order_scores():
    dec = dec_of(3, {0b001: 0.2, 0b011: 0.3, 0b100: 0.1})
    assert np.allclose(dimension_scores(dec, "first_order"), [0.2, 0.0, 0.1])
    assert np.allclose(dimension_scores(dec, "total"), [0.5, 0.3, 0.1])
    with pytest.raises(ValueError):
        dimension_scores(dec, "largest")


def test_scores_follow_dimension_relabeling(rng):
    index_set = total_degree_index_set(3, 30)
    coefficients = rng.normal(size=len(index_set))
    perm = [2, 0, 1]
    original = surrogate(index_set.indices.tolist(), coefficients)
    relabeled = surrogate(index_set.indices[:, perm].tolist(), coefficients)
    assert np.allclose(dimension_scores(sobol_from_gpc(relabeled)),
                       dimension_scores(sobol_from_gpc(original))[perm], atol=1e-14)


def test_round_trip_through_trace_document():
    dec = dec_of(3, {0b001: 0.25, 0b110: 0.5})
    again = SobolDecomposition.from_dict(dec.to_dict(), 3)
    assert again.contributions == dec.contributions
    assert again.total_variance == dec.total_variance


# =========================
# ANOVA oracle
# =========================


def anova_variances(fn, rect: HyperRectangle, order: int = 8) -> dict[int, float]:
    """σ²_T of every non-empty subset by inclusion-exclusion over conditional expectations on a Gauss grid."""
    d = rect.dimension
    t, w = np.polynomial.legendre.leggauss(order)
    axes = [rect.lower[k] + (rect.upper[k] - rect.lower[k]) * (t + 1) / 2 for k in range(d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    values = fn(grid).reshape((order,) * d)
    weights = w / 2

    def conditional(subset):
        out = values
        for k in range(d):
            if k not in subset:
                out = np.tensordot(out, weights, axes=([k], [0]))[..., None]
                out = np.moveaxis(out, -1, k)
        return np.broadcast_to(out, values.shape)

    full_weights = np.ones((order,) * d)
    for k in range(d):
        shape = [1] * d
        shape[k] = order
        full_weights = full_weights * weights.reshape(shape)

    result = {}
    for size in range(1, d + 1):
        for subset in itertools.combinations(range(d), size):
            term = np.zeros(values.shape)
            for r in range(size + 1):
                for sub in itertools.combinations(subset, r):
                    term = term + (-1) ** (size - r) * conditional(set(sub))
            result[sum(1 << k for k in subset)] = float(np.sum(full_weights * term ** 2))
    return result


@pytest.mark.parametrize("case", range(20))
def test_sobol_matches_anova_quadrature(case):
    rng = np.random.default_rng(1000 + case)
    d = 2 + case % 2
    exponents = total_degree_index_set(d, math.comb(4 + d, d) + 1).indices
    monomial_coefficients = rng.normal(size=len(exponents))

    def poly(y):
        return np.sum(monomial_coefficients * np.prod(y[:, None, :] ** exponents[None, :, :], axis=2), axis=1)

    lower = rng.uniform(0.0, 0.5, d)
    rect = HyperRectangle(lower, lower + rng.uniform(0.2, 0.5, d))
    batch = lhs_sample(rect, 200, derive_stream(case, 1, 0))
    fit = fit_gpc(batch, poly(batch.points), rect, total_degree_index_set(d, math.comb(4 + d, d) + 1))
    dec = sobol_from_gpc(fit)
    oracle = anova_variances(poly, rect)
    for mask, expected in oracle.items():
        assert dec.subset(mask) == pytest.approx(expected, abs=1e-8)
