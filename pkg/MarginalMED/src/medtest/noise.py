#!/usr/bin/env python3
"""
Measurement-error variance estimation and error augmentation.

The variance of each group's errors is the gap between the smoothed
variance of centered observations on the diagonal (signal plus noise) and
the smoothed within-subject covariance on the diagonal (signal only).
Both smooths run on the same within-subject pair design: local-linear
along the diagonal, local-quadratic across it. The gap is then the smooth
of (r_ij - r_ik)^2 / 2, in which each subject's own signal cancels.

Augmentation adds N(0, |sigma2_y - sigma2_x|) noise to every observation
of the less noisy group so both groups share one error law.
"""

import logging
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DataError, DegenerateWindowError, InsufficientPairsError
from .models.dataset import SubjectRecord, TwoSampleDataset
from .models.results import DiagonalCurve, NoiseEstimate, TestResult
from .permutation import AUGMENT_STREAM, TestConfig, derive_seed, permutation_test, replicate_rng
from .smoother import SmootherConfig, local_linear_1d
from .statistic import MedStatistic

logger = logging.getLogger(__name__)

GAP_BAND = (0.25, 0.75)


class NoiseMode(str, Enum):
    NONE = "none"
    EQUAL_ERRORS = "equal_errors"
    AUGMENT = "augment"


def _pooled(sample: Sequence[SubjectRecord]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    used = [s for s in sample if s.n_points > 0]
    if not used:
        return np.empty(0), np.empty(0), np.empty(0)
    times = np.concatenate([s.times for s in used])
    values = np.concatenate([s.values for s in used])
    weights = np.concatenate([np.full(s.n_points, 1.0 / s.n_points) for s in used])
    return times, values, weights


def estimate_mean_function(sample: Sequence[SubjectRecord], h: float, grid: np.ndarray,
                           config: Optional[SmootherConfig] = None) -> DiagonalCurve:
    """Pooled local-linear mean, each observation weighted 1/N_i."""
    config = config or SmootherConfig()
    times, values, weights = _pooled(sample)
    if times.size < 2:
        raise DataError("mean estimation needs at least two pooled observations")
    grid = np.asarray(grid, dtype=float)
    return DiagonalCurve(grid, local_linear_1d(times, values, weights, grid, h, config))


def _within_pairs(sample: Sequence[SubjectRecord], residuals: Sequence[np.ndarray]):
    """Ordered within-subject pairs j != k: midpoint, half gap, weight, r_j, r_k."""
    mids, halves, weights, rj, rk = [], [], [], [], []
    for subject, r in zip(sample, residuals):
        n_i = subject.n_points
        if n_i < 2:
            continue
        j, k = np.nonzero(~np.eye(n_i, dtype=bool))
        t = subject.times
        mids.append((t[j] + t[k]) / 2.0)
        halves.append((t[j] - t[k]) / 2.0)
        weights.append(np.full(j.size, 1.0 / (n_i * (n_i - 1))))
        rj.append(r[j])
        rk.append(r[k])
    if not mids:
        raise InsufficientPairsError("no subject has two or more observations")
    return tuple(np.concatenate(parts) for parts in (mids, halves, weights, rj, rk))


def _rotated_smooth(mid: np.ndarray, half: np.ndarray, weight: np.ndarray, responses: np.ndarray,
                    grid: np.ndarray, h: float, config: SmootherConfig) -> np.ndarray:
    """
    Fit b0 + b1 a + b2 b^2 around each diagonal point, a the offset along
    the diagonal and b across it; returns b0 for every response row.
    """
    order = np.argsort(mid, kind="stable")
    mid, half, weight, responses = mid[order], half[order], weight[order], responses[:, order]
    out = np.empty((responses.shape[0], grid.size))
    for i, t in enumerate(grid):
        for attempt in range(config.max_expansions + 1):
            width = h * config.expand_factor ** attempt
            lo = int(np.searchsorted(mid, t - width, side="right"))
            hi = int(np.searchsorted(mid, t + width, side="left"))
            across = half[lo:hi] / width
            inside = np.abs(across) < 1.0
            along = (mid[lo:hi][inside] - t) / width
            k = weight[lo:hi][inside] * config.kernel(along) * config.kernel(across[inside])
            if k.sum() > 0.0:
                break
        else:
            raise DegenerateWindowError(t, grid_index=i, surface="covariance diagonal")
        across = across[inside]
        y = responses[:, lo:hi][:, inside]
        design = np.column_stack([np.ones(along.size), along, across * across])
        normal = design.T @ (k[:, None] * design)
        if np.linalg.cond(normal) * config.cond_tol >= 1.0:
            out[:, i] = (y @ k) / k.sum()
        else:
            out[:, i] = np.linalg.solve(normal, design.T @ (k[:, None] * y.T))[0]
    return out


def noise_components(sample: Sequence[SubjectRecord], config: SmootherConfig,
                     h: Optional[float] = None):
    """(sigma2, mean curve, raw diagonal V, covariance diagonal C) for one group."""
    h = h or config.h_noise
    if not any(s.n_points >= 2 for s in sample):
        raise InsufficientPairsError("no subject has two or more observations")
    grid = config.grid
    # Centred on one observed value so constant data leave exactly zero residuals
    shift = next(s.values[0] for s in sample if s.n_points)
    centred = [s.with_values(s.values - shift) for s in sample]
    mean_curve = estimate_mean_function(centred, h, grid, config)
    residuals = [s.values - np.interp(s.times, grid, mean_curve.values) for s in centred]

    mid, half, weight, rj, rk = _within_pairs(sample, residuals)
    responses = np.vstack([(rj * rj + rk * rk) / 2.0, rj * rk])
    raw_diag, cov_diag = _rotated_smooth(mid, half, weight, responses, grid, h, config)

    band = (grid >= GAP_BAND[0]) & (grid <= GAP_BAND[1])
    gap = float(np.mean(raw_diag[band] - cov_diag[band]))
    sigma2 = max(0.0, gap)
    mean_curve = DiagonalCurve(grid, mean_curve.values + shift)
    return sigma2, mean_curve, DiagonalCurve(grid, raw_diag), DiagonalCurve(grid, cov_diag)


def estimate_noise_variance(sample: Sequence[SubjectRecord], config: SmootherConfig,
                            h: Optional[float] = None) -> float:
    """Measurement-error variance of one group, clamped at zero."""
    return noise_components(sample, config, h)[0]


def estimate_noise(dataset: TwoSampleDataset, config: SmootherConfig) -> NoiseEstimate:
    sx, mean_x, raw_x, cov_x = noise_components(dataset.x_subjects, config)
    sy, mean_y, raw_y, cov_y = noise_components(dataset.y_subjects, config)
    logger.info("estimated error variances: x=%.6g y=%.6g", sx, sy)
    return NoiseEstimate(
        sigma2_x=sx, sigma2_y=sy,
        mean_curve_x=mean_x, mean_curve_y=mean_y,
        cov_diag_x=cov_x, cov_diag_y=cov_y,
        raw_diag_x=raw_x, raw_diag_y=raw_y,
    )


def augment_errors(dataset: TwoSampleDataset, sigma2_x: float, sigma2_y: float, seed: int) -> TwoSampleDataset:
    """Add N(0, |sigma2_y - sigma2_x|) noise to the lower-variance group only."""
    if sigma2_x < 0 or sigma2_y < 0:
        raise ValueError("error variances must be non-negative")
    variance = abs(sigma2_y - sigma2_x)
    if variance == 0.0:
        return dataset
    rng = replicate_rng(seed, AUGMENT_STREAM)
    scale = np.sqrt(variance)

    def noisy(subjects):
        return [s.with_values(s.values + rng.normal(0.0, scale, size=s.n_points)) for s in subjects]

    if sigma2_x < sigma2_y:
        return TwoSampleDataset(noisy(dataset.x_subjects), dataset.y_subjects)
    return TwoSampleDataset(dataset.x_subjects, noisy(dataset.y_subjects))


def augment_for_test(dataset: TwoSampleDataset, config: TestConfig):
    """Estimate both variances and augment once; returns (dataset, estimate, augmentation seed)."""
    estimate = estimate_noise(dataset, config.smoother)
    seed = derive_seed(config.seed, AUGMENT_STREAM)
    augmented = augment_errors(dataset, estimate.sigma2_x, estimate.sigma2_y, seed)
    return augmented, estimate, seed


def med_test_with_noise(dataset: TwoSampleDataset, config: TestConfig, equal_error_assumed: bool) -> TestResult:
    """
    MED permutation test on contaminated data. Without the equal-error
    assumption the data are augmented once, before permutation, and the
    permutations shuffle the augmented subjects.
    """
    if not equal_error_assumed:
        dataset, _, _ = augment_for_test(dataset, config)
    return permutation_test(dataset, config, MedStatistic(config.smoother))
