#!/usr/bin/env python3
"""
Null design: both groups follow the same two-term Fourier process.
"""

import numpy as np

from .base import BaseGenerator


class Example1Generator(BaseGenerator):
    """X and Y share one law, so every marginal coincides (MED = 0)."""

    FAMILY_NAME = "example1"

    def sample_x(self, rng: np.random.Generator, times: np.ndarray) -> np.ndarray:
        return self.fourier_process(rng, times)

    def sample_y(self, rng: np.random.Generator, times: np.ndarray) -> np.ndarray:
        return self.fourier_process(rng, times)
