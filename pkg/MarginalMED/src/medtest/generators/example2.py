#!/usr/bin/env python3
"""
Alternative with matched first two moments: Y has mean 0 and variance 1 at
every t, like X, but its scores are a two-component Gaussian mixture.
"""

import numpy as np

from .base import BaseGenerator


class Example2Generator(BaseGenerator):

    FAMILY_NAME = "example2"

    def mixture_scores(self, rng: np.random.Generator, size: int = 2) -> np.ndarray:
        """+-mu_s with probability 1/2 each, plus N(0, sigma_s^2)."""
        signs = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return signs * self.design.mu_s + rng.normal(0.0, self.design.sigma_s, size=size)

    def sample_x(self, rng: np.random.Generator, times: np.ndarray) -> np.ndarray:
        return self.fourier_process(rng, times)

    def sample_y(self, rng: np.random.Generator, times: np.ndarray) -> np.ndarray:
        s = self.mixture_scores(rng)
        return s[0] * times ** 2 + s[1] * np.sqrt(1.0 - times ** 4)
