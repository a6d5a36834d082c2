#!/usr/bin/env python3
"""
Marginal energy distance statistic, the dense-curve energy distance
baseline, and the closed-form value for centered Gaussian marginals.
"""

import math
from typing import Callable, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.spatial.distance import cdist, pdist

from .errors import GridMismatchError
from .models.dataset import DenseSample, TwoSampleDataset
from .models.results import DiagonalCurve, MedBreakdown
from .smoother import PointSet, SmootherConfig, Surface, diagonal_curve, trapezoid_integral


def med_statistic(dataset: TwoSampleDataset, config: SmootherConfig) -> MedBreakdown:
    """Integrate 2 G1(t,t) - G2(t,t) - G3(t,t) over the shared grid."""
    point_sets = (PointSet.from_subjects(dataset.x_subjects), PointSet.from_subjects(dataset.y_subjects))
    g1 = diagonal_curve(dataset, Surface.G1, config, point_sets=point_sets)
    g2 = diagonal_curve(dataset, Surface.G2, config, point_sets=point_sets)
    g3 = diagonal_curve(dataset, Surface.G3, config, point_sets=point_sets)
    integrand = DiagonalCurve(g1.grid, 2.0 * g1.values - (g2.values + g3.values))
    return MedBreakdown(
        g1_curve=g1,
        g2_curve=g2,
        g3_curve=g3,
        statistic=trapezoid_integral(integrand),
        config=config.to_dict(),
    )


class MedStatistic:
    """Picklable dataset -> MED_n callable for the permutation engine."""

    def __init__(self, config: SmootherConfig):
        self.config = config

    def __call__(self, dataset: TwoSampleDataset) -> float:
        return med_statistic(dataset, self.config).statistic


def _l2_weights(grid: np.ndarray) -> np.ndarray:
    """Trapezoid weights w with sum(w * f**2) the trapezoid value of the integral of f**2."""
    dt = np.diff(grid)
    w = np.zeros(grid.size)
    w[:-1] += dt / 2.0
    w[1:] += dt / 2.0
    return w


def dense_energy_distance(x_curves, y_curves, grid) -> float:
    """
    U-type energy distance between two samples of fully observed curves:

        2/(nm) sum ||X_i - Y_j|| - 2/(n(n-1)) sum_{i<j} ||X_i - X_j||
                                 - 2/(m(m-1)) sum_{i<j} ||Y_i - Y_j||

    with ||f||^2 the trapezoid integral of f^2 on grid.
    """
    grid = np.asarray(grid, dtype=float)
    x = np.atleast_2d(np.asarray(x_curves, dtype=float))
    y = np.atleast_2d(np.asarray(y_curves, dtype=float))
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise GridMismatchError("grid must be one strictly increasing vector of length ≥ 2")
    if x.shape[1] != grid.size or y.shape[1] != grid.size:
        raise GridMismatchError(
            f"curves have {x.shape[1]} and {y.shape[1]} values but the grid has {grid.size} points"
        )
    if x.shape[0] < 2 or y.shape[0] < 2:
        raise ValueError("each sample needs at least two curves")

    scale = np.sqrt(_l2_weights(grid))
    xs, ys = x * scale, y * scale
    cross = cdist(xs, ys).mean()
    within_x = pdist(xs).mean()
    within_y = pdist(ys).mean()
    return float(2.0 * cross - within_x - within_y)


class DenseEnergyStatistic:
    """Picklable DenseSample -> ED_n callable."""

    def __call__(self, sample: DenseSample) -> float:
        return dense_energy_distance(sample.x_curves, sample.y_curves, sample.grid)


Variance = Union[float, Callable[[np.ndarray], np.ndarray]]


def _variance_values(var: Variance, t: np.ndarray) -> np.ndarray:
    if callable(var):
        values = np.broadcast_to(np.asarray(var(t), dtype=float), t.shape)
    else:
        values = np.full(t.shape, float(var))
    if np.any(values < 0):
        raise ValueError("variance functions must be non-negative")
    return values


def gaussian_population_med(var_x: Variance, var_y: Variance, grid_size: int = 10001) -> float:
    """
    MED for centered Gaussian marginals, from E|N(0, v)| = sqrt(2v/pi):

        integral of sqrt(2/pi) (2 sqrt(vx + vy) - sqrt(2 vx) - sqrt(2 vy)) dt
    """
    t = np.linspace(0.0, 1.0, grid_size)
    vx, vy = _variance_values(var_x, t), _variance_values(var_y, t)
    integrand = math.sqrt(2.0 / math.pi) * (2.0 * np.sqrt(vx + vy) - np.sqrt(2.0 * vx) - np.sqrt(2.0 * vy))
    return float(trapezoid(integrand, t))
