import numpy as np
import pytest

from medtest.errors import InsufficientPairsError
from medtest.generators import build_generator
from medtest.models import SimDesign, SubjectRecord, TwoSampleDataset
from medtest.noise import (
    _rotated_smooth,
    augment_errors,
    augment_for_test,
    estimate_mean_function,
    estimate_noise,
    estimate_noise_variance,
    med_test_with_noise,
)
from medtest.permutation import TestConfig, permutation_test
from medtest.smoother import SmootherConfig
from medtest.statistic import MedStatistic


def example1(n, sigma, seed):
    design = SimDesign(family="example1", n=n, m=n, sigma1=sigma, sigma2=sigma)
    return build_generator(design).generate(seed)


def test_mean_of_constant_and_affine_data(sparse_dataset):
    grid = np.linspace(0, 1, 21)
    constant = sparse_dataset.map_values(lambda v: np.full_like(v, 4.0))
    curve = estimate_mean_function(constant.x_subjects, 0.1, grid)
    np.testing.assert_allclose(curve.values, 4.0, rtol=0, atol=1e-12)

    affine = [s.with_values(2.0 + 3.0 * s.times) for s in sparse_dataset.x_subjects]
    curve = estimate_mean_function(affine, 0.1, grid)
    np.testing.assert_allclose(curve.values, 2.0 + 3.0 * grid, rtol=0, atol=1e-9)


def test_mean_of_example1_is_near_zero():
    grid = np.linspace(0, 1, 101)
    interior = (grid >= 0.1) & (grid <= 0.9)
    within = [
        np.max(np.abs(estimate_mean_function(example1(300, 0.0, seed).x_subjects, 0.2, grid).values[interior])) <= 0.15
        for seed in range(5)
    ]
    assert sum(within) >= 4


def test_noise_variance_recovered():
    config = SmootherConfig()
    sigmas = [np.sqrt(estimate_noise_variance(example1(300, 0.2, seed).x_subjects, config)) for seed in range(5)]
    assert sum(0.13 <= s <= 0.27 for s in sigmas) >= 4


def test_noise_free_variance_near_zero():
    assert estimate_noise_variance(example1(300, 0.0, 2).x_subjects, SmootherConfig()) <= 0.02


def test_noise_variance_ignores_constant_shift():
    sample = example1(100, 0.2, 3).y_subjects
    shifted = [s.with_values(s.values + 7.0) for s in sample]
    config = SmootherConfig()
    assert estimate_noise_variance(shifted, config) == pytest.approx(
        estimate_noise_variance(sample, config), rel=1e-9, abs=1e-12)


def test_noise_variance_needs_within_subject_pairs():
    sample = [SubjectRecord.from_arrays(f"s{i}", [i / 10], [float(i)]) for i in range(1, 9)]
    with pytest.raises(InsufficientPairsError):
        estimate_noise_variance(sample, SmootherConfig())


def test_estimate_noise_carries_curves():
    estimate = estimate_noise(example1(60, 0.1, 4), SmootherConfig(grid_size=51))
    assert estimate.sigma2_x >= 0 and estimate.sigma2_y >= 0
    assert set(estimate.curves()) == {"mean_x", "mean_y", "cov_diag_x", "cov_diag_y", "raw_diag_x", "raw_diag_y"}
    assert len(estimate.cov_diag_x) == 51
    assert set(estimate.to_dict()) == {"sigma2_x", "sigma2_y"}


def test_augment_equal_variances_is_identity(sparse_dataset):
    assert augment_errors(sparse_dataset, 0.04, 0.04, seed=1) is sparse_dataset


def test_augment_touches_only_the_less_noisy_group(sparse_dataset):
    augmented = augment_errors(sparse_dataset, 0.0025, 0.0625, seed=1)
    assert augmented.y_subjects == sparse_dataset.y_subjects
    for before, after in zip(sparse_dataset.x_subjects, augmented.x_subjects):
        assert after.id == before.id
        assert np.array_equal(after.times, before.times)
        assert not np.array_equal(after.values, before.values)

    flipped = augment_errors(sparse_dataset, 0.0625, 0.0025, seed=1)
    assert flipped.x_subjects == sparse_dataset.x_subjects
    assert flipped.y_subjects != sparse_dataset.y_subjects


def test_augmentation_noise_variance():
    zeros = [SubjectRecord.from_arrays(f"x{i}", np.linspace(0, 1, 1000), np.zeros(1000)) for i in range(100)]
    dataset = TwoSampleDataset(zeros, zeros[:2])
    augmented = augment_errors(dataset, 0.0025, 0.0625, seed=5)
    noise = np.concatenate([s.values for s in augmented.x_subjects])
    assert noise.size == 10 ** 5
    assert 0.058 <= noise.var() <= 0.062


def test_augment_rejects_negative_variance(sparse_dataset):
    with pytest.raises(ValueError):
        augment_errors(sparse_dataset, -0.1, 0.2, seed=0)


def test_augment_for_test_is_reproducible(fast_config):
    dataset = build_generator(SimDesign(family="example1", n=40, m=40, sigma1=0.05, sigma2=0.25)).generate(3)
    a, estimate, seed = augment_for_test(dataset, fast_config)
    b, _, seed_again = augment_for_test(dataset, fast_config)
    assert a == b
    assert seed == seed_again
    assert estimate.sigma2_x < estimate.sigma2_y
    assert a.y_subjects == dataset.y_subjects


def test_equal_errors_test_matches_plain_test(sparse_dataset, fast_config):
    plain = permutation_test(sparse_dataset, fast_config, MedStatistic(fast_config.smoother))
    noisy = med_test_with_noise(sparse_dataset, fast_config, equal_error_assumed=True)
    assert noisy.statistic == plain.statistic
    assert noisy.permuted_statistics == plain.permuted_statistics
    assert noisy.p_value == plain.p_value


def test_augmented_test_runs(fast_config):
    dataset = build_generator(SimDesign(family="example1", n=30, m=30, sigma1=0.05, sigma2=0.25)).generate(8)
    result = med_test_with_noise(dataset, TestConfig(smoother=fast_config.smoother, n_permutations=10),
                                 equal_error_assumed=False)
    assert 0.1 <= result.p_value <= 1.0


def test_pair_smooth_widens_past_zero_weight_edge():
    config = SmootherConfig()
    mid, half, weight = np.array([0.11, 0.6]), np.zeros(2), np.ones(2)
    out = _rotated_smooth(mid, half, weight, np.ones((1, 2)), config.grid, 0.2, config)
    np.testing.assert_allclose(out, 1.0, rtol=1e-12)
