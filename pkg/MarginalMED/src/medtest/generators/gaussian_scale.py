#!/usr/bin/env python3
"""
Scale alternative with a closed-form MED: X(t) ~ N(0, 1) and
Y(t) ~ N(0, y_scale^2) at every t.
"""

import numpy as np

from .base import BaseGenerator


class GaussianScaleGenerator(BaseGenerator):

    FAMILY_NAME = "gaussian_scale"

    def sample_x(self, rng: np.random.Generator, times: np.ndarray) -> np.ndarray:
        return self.fourier_process(rng, times)

    def sample_y(self, rng: np.random.Generator, times: np.ndarray) -> np.ndarray:
        return self.fourier_process(rng, times, scale=self.design.y_scale)

    def population_med(self) -> float:
        from ..statistic import gaussian_population_med
        return gaussian_population_med(1.0, self.design.y_scale ** 2)
