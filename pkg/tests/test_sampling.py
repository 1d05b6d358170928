import numpy as np
import pytest

from app.helpers.errors import SamplingError
from app.methods.sampling import (SampleDesign, baseline_stream, derive_stream, lhs_cell_indices, lhs_sample,
                                  replication_seed, uniform_sample)
from app.methods.stratification import HyperRectangle, contains_many

SEED = 123456789


def test_derive_stream_is_reproducible():
    a = derive_stream(SEED, 1, 0).random(100)
    b = derive_stream(SEED, 1, 0).random(100)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("other", [(1, 1), (2, 0)])
def test_derive_stream_separates_stage_and_stratum(other):
    a = derive_stream(SEED, 1, 0).random(100)
    b = derive_stream(SEED, *other).random(100)
    assert not np.array_equal(a, b)


def test_baseline_and_stage_streams_differ():
    assert not np.array_equal(baseline_stream(SEED, 0).random(10), derive_stream(SEED, 0, 0).random(10))


def test_replication_seeds_are_stable_and_distinct():
    seeds = [replication_seed(SEED, r) for r in range(50)]
    assert seeds == [replication_seed(SEED, r) for r in range(50)]
    assert len(set(seeds)) == 50
    assert all(0 <= s < 2**64 for s in seeds)


def test_seed_out_of_range():
    with pytest.raises(SamplingError):
        derive_stream(-1, 1, 0)
    with pytest.raises(SamplingError):
        derive_stream(2**64, 1, 0)


@pytest.mark.parametrize("sampler", [uniform_sample, lhs_sample])
def test_zero_size_rejected(sampler):
    with pytest.raises(SamplingError):
        sampler(HyperRectangle.unit(2), 0, derive_stream(SEED, 1, 0))


@pytest.mark.parametrize("sampler", [uniform_sample, lhs_sample])
def test_single_point_inside(sampler):
    rect = HyperRectangle((0.25, 0.5), (0.5, 1.0))
    batch = sampler(rect, 1, derive_stream(SEED, 1, 3), stratum_id=3)
    assert batch.points.shape == (1, 2)
    assert contains_many(rect, batch.points).all()
    assert batch.stratum_id == 3


def test_uniform_moments():
    rect = HyperRectangle((0.0, 0.0), (0.5, 1.0))
    n = 10_000
    batch = uniform_sample(rect, n, derive_stream(SEED, 1, 0))
    assert batch.design is SampleDesign.SMC
    se = rect.extent / np.sqrt(12.0 * n)
    assert np.all(np.abs(batch.points.mean(axis=0) - np.array([0.25, 0.5])) < 5 * se)


def test_uniform_sample_is_reproducible():
    rect = HyperRectangle.unit(3)
    a = uniform_sample(rect, 20, derive_stream(SEED, 4, 2)).points
    b = uniform_sample(rect, 20, derive_stream(SEED, 4, 2)).points
    assert np.array_equal(a, b)


def test_lhs_one_point_per_quarter():
    batch = lhs_sample(HyperRectangle.unit(1), 4, derive_stream(SEED, 1, 0))
    counts = np.histogram(batch.points[:, 0], bins=[0, 0.25, 0.5, 0.75, 1.0])[0]
    assert counts.tolist() == [1, 1, 1, 1]


def test_lhs_occupancy_in_a_sub_box():
    rect = HyperRectangle((0.5, 0.0), (1.0, 0.5))
    batch = lhs_sample(rect, 50, derive_stream(SEED, 2, 5))
    assert batch.design is SampleDesign.LHS
    cells = lhs_cell_indices(batch, rect)
    for k in range(2):
        assert sorted(cells[:, k]) == list(range(50))


@pytest.mark.parametrize("d", [1, 2, 5, 10])
def test_lhs_marginal_occupancy_property(d, rng):
    for n in range(1, 201):
        lower = rng.uniform(0.0, 0.5, d)
        upper = lower + rng.uniform(0.05, 0.5, d)
        rect = HyperRectangle(lower, upper)
        batch = lhs_sample(rect, n, derive_stream(int(rng.integers(2**62)), n, d))
        assert contains_many(rect, batch.points).all()
        cells = lhs_cell_indices(batch, rect)
        expected = np.arange(n)
        for k in range(d):
            assert np.array_equal(np.sort(cells[:, k]), expected)


def test_lhs_coordinate_mean_beats_smc():
    rect = HyperRectangle((0.2,), (0.6,))
    n, reps = 10, 1000
    lhs_means = [lhs_sample(rect, n, derive_stream(SEED, r, 0)).points.mean() for r in range(reps)]
    smc_means = [uniform_sample(rect, n, derive_stream(SEED, r, 1)).points.mean() for r in range(reps)]
    assert abs(np.mean(lhs_means) - 0.4) < 5 * np.sqrt(0.4 ** 2 / (12 * n ** 3) / reps)
    assert np.var(lhs_means, ddof=1) < np.var(smc_means, ddof=1)
    assert np.var(lhs_means, ddof=1) < 2 * 0.4 ** 2 / (12 * n ** 2)
