import math

import numpy as np
import pytest

from app.bench.problems import P2Model, ball_octant_volume
from app.helpers.errors import ConfigError, ModelError, SamplingError
from app.methods.estimators import (BaselineEstimate, StageEstimate, StratumStats, combine, lhs_estimate,
                                    optimal_weights, smc_estimate, stage_estimate, stage_variance)
from app.methods.sampling import baseline_stream, derive_stream, lhs_sample
from app.methods.stratification import HyperRectangle, Stratification, bisect

SEED = 4242


def fake_stage(probabilities, stds, n=50):
    stats = tuple(StratumStats(i, p, 0.0, s, n, None, None) for i, (p, s) in enumerate(zip(probabilities, stds)))
    return StageEstimate(1, Stratification.trivial(1), stats, 0.0, 0.0, n * len(stats))


# =========================
# Variance estimate
# =========================


@pytest.mark.parametrize("probabilities, stds, expected", [
    ([1.0], [2.0], 0.08),
    ([0.5, 0.5], [1.0, 1.0], 0.01),
    ([0.25, 0.75], [0.0, 0.0], 0.0),
])
def test_stage_variance(probabilities, stds, expected):
    assert stage_variance(fake_stage(probabilities, stds)) == pytest.approx(expected, abs=1e-15)


# =========================
# Weights
# =========================


@pytest.mark.parametrize("variances, expected", [
    ([1.0, 1.0], [0.5, 0.5]),
    ([1.0, 3.0], [0.75, 0.25]),
    ([2.0, 0.0, 5.0], [0.0, 1.0, 0.0]),
    ([0.0, 3.0, 0.0], [0.0, 0.0, 1.0]),
    ([4.0], [1.0]),
])
def test_optimal_weights(variances, expected):
    assert np.allclose(optimal_weights(variances), expected, atol=1e-15)


@pytest.mark.parametrize("variances", [[], [1.0, -0.5], [1.0, np.inf], [np.nan]])
def test_optimal_weights_rejects_bad_input(variances):
    with pytest.raises(ValueError):
        optimal_weights(variances)


def test_optimal_weights_minimise_the_combined_variance(rng):
    for _ in range(1000):
        size = int(rng.integers(1, 7))
        v = rng.uniform(0.01, 10.0, size)
        w = optimal_weights(v)
        assert np.all(w >= 0)
        assert abs(math.fsum(w) - 1.0) <= 1e-14
        best = float(np.sum(w * w * v))
        assert best == pytest.approx(1.0 / np.sum(1.0 / v), rel=1e-12)
        trials = rng.dirichlet(np.ones(size), 1000)
        assert np.all(best <= (trials ** 2) @ v + 1e-15)


def test_smc_stages_combine_like_one_pooled_sample():
    sigma2, m1, m2 = 2.5, 30, 70
    w = optimal_weights([sigma2 / m1, sigma2 / m2])
    assert np.allclose(w, [m1 / (m1 + m2), m2 / (m1 + m2)], atol=1e-15)


def test_combine():
    stages = [BaselineEstimate("SMC", 0.0, 1.0, 10), BaselineEstimate("SMC", 2.0, 1.0, 10)]
    ensemble = combine(stages, optimal_weights([s.variance for s in stages]))
    assert ensemble.value == pytest.approx(1.0)
    assert ensemble.variance == pytest.approx(0.5)


def test_combine_single_stage_is_identity():
    stage = BaselineEstimate("LHS", 0.731, 0.002, 50)
    ensemble = combine([stage], [1.0])
    assert ensemble.value == 0.731
    assert ensemble.variance == 0.002


def test_combine_with_selector_has_zero_variance():
    stages = [BaselineEstimate("LHS", 0.4, 0.1, 5), BaselineEstimate("LHS", 0.5, 0.0, 5)]
    ensemble = combine(stages, optimal_weights([0.1, 0.0]))
    assert ensemble.value == 0.5
    assert ensemble.variance == 0.0


def test_combine_length_mismatch():
    with pytest.raises(ValueError):
        combine([BaselineEstimate("LHS", 0.4, 0.1, 5)], [0.5, 0.5])


# =========================
# Stage estimate
# =========================


def test_constant_model_has_zero_variance(constant_model):
    strat = bisect(bisect(Stratification.trivial(2), 0, 0), 1, 1)
    stage = stage_estimate(strat, constant_model(2, 3.0), 20, 3, SEED)
    assert stage.mean == 3.0
    assert stage.variance == 0.0
    assert stage.n_samples == 60
    assert all(s.n == 20 and s.std == 0.0 for s in stage.strata)


def test_trivial_stratification_is_plain_lhs(function_model):
    model = function_model(2, lambda y: np.sin(y[:, 0]) + y[:, 1] ** 2)
    stage = stage_estimate(Stratification.trivial(2), model, 50, 1, SEED)
    batch = lhs_sample(HyperRectangle.unit(2), 50, derive_stream(SEED, 1, 0))
    values = model(batch.points)
    assert stage.mean == float(np.mean(values))
    assert stage.variance == pytest.approx(np.var(values, ddof=1) / 50, rel=1e-12)


def test_stage_mean_is_probability_weighted(function_model):
    model = function_model(2, lambda y: y[:, 0] * y[:, 1])
    strat = bisect(Stratification.trivial(2), 0, 1)
    stage = stage_estimate(strat, model, 30, 2, SEED)
    assert stage.mean == pytest.approx(sum(s.probability * s.mean for s in stage.strata), abs=1e-15)
    assert [s.stratum_id for s in stage.strata] == strat.ids


def test_worker_count_does_not_change_the_result(function_model):
    model = function_model(3, lambda y: np.exp(y.sum(axis=1)))
    strat = Stratification.trivial(3)
    for sid, dim in [(0, 0), (1, 2), (2, 1), (4, 0)]:
        strat = bisect(strat, sid, dim)
    serial = stage_estimate(strat, model, 25, 5, SEED, workers=1)
    threaded = stage_estimate(strat, model, 25, 5, SEED, workers=4)
    assert serial.mean == threaded.mean
    assert serial.variance == threaded.variance
    assert [s.mean for s in serial.strata] == [s.mean for s in threaded.strata]


def test_non_finite_model_output_reports_the_point(function_model):
    model = function_model(2, lambda y: np.where(y[:, 0] > 0.5, np.nan, 1.0))
    with pytest.raises(ModelError) as info:
        stage_estimate(Stratification.trivial(2), model, 20, 1, SEED)
    assert info.value.point is not None
    assert info.value.point[0] > 0.5


def test_stage_estimate_validates_inputs(constant_model):
    with pytest.raises(ConfigError):
        stage_estimate(Stratification.trivial(2), constant_model(2), 1, 1, SEED)
    with pytest.raises(ConfigError):
        stage_estimate(Stratification.trivial(2), constant_model(3), 10, 1, SEED)


@pytest.mark.slow
@pytest.mark.parametrize("splits", [0, 5, 19])
def test_stage_estimates_are_unbiased(splits):
    model = P2Model(2, 2, 0.4)
    strat = Stratification.trivial(2)
    rng = np.random.default_rng(splits)
    for _ in range(splits):
        strat = bisect(strat, int(rng.choice(strat.ids)), int(rng.integers(2)))
    means = [stage_estimate(strat, model, 50, 1, seed).mean for seed in range(100)]
    se = np.std(means, ddof=1) / np.sqrt(len(means))
    assert abs(np.mean(means) - ball_octant_volume(2, 0.4)) < 4 * se + 1e-12


# =========================
# Baselines
# =========================


@pytest.mark.parametrize("estimator", [smc_estimate, lhs_estimate])
def test_baselines_of_a_constant(estimator, constant_model):
    assert estimator(constant_model(3, 3.0), 40, baseline_stream(SEED)).mean == 3.0


def test_smc_mean_of_identity(function_model):
    n = 100_000
    est = smc_estimate(function_model(2, lambda y: y[:, 0]), n, baseline_stream(SEED, 1))
    assert abs(est.mean - 0.5) < 5 * math.sqrt(1 / (12 * n))
    assert est.variance == pytest.approx(1 / (12 * n), rel=0.05)


def test_smc_is_reproducible(function_model):
    model = function_model(2, lambda y: y[:, 0] * y[:, 1])
    assert smc_estimate(model, 100, baseline_stream(7, 1)).mean == smc_estimate(model, 100, baseline_stream(7, 1)).mean


def test_smc_needs_two_points(constant_model):
    with pytest.raises(SamplingError):
        smc_estimate(constant_model(2), 1, baseline_stream(SEED))


def test_lhs_single_point(function_model):
    est = lhs_estimate(function_model(1, lambda y: y[:, 0]), 1, baseline_stream(SEED))
    assert 0.0 <= est.mean < 1.0
    assert est.variance == 0.0
    assert est.n_samples == 1


def test_lhs_beats_smc_on_additive_functions(function_model):
    model = function_model(3, lambda y: y.sum(axis=1))
    n = 100
    estimates = [lhs_estimate(model, n, baseline_stream(r)).mean for r in range(1000)]
    smc_variance = 3 / 12 / n
    assert np.var(estimates, ddof=1) * 10 < smc_variance
