#!/usr/bin/env python3
"""
Base generator class with the shared sampling scheme.
"""

from abc import ABC, abstractmethod
from typing import List

import numpy as np

from ..models.dataset import SubjectRecord, TwoSampleDataset
from ..models.design import SimDesign
from ..permutation import replicate_rng

X_STREAM = 0
Y_STREAM = 1


class BaseGenerator(ABC):
    """
    Abstract base class for simulation designs.

    Each group draws from its own stream of (seed, group), so two designs
    that share the X process produce the same X group for the same seed.
    """

    FAMILY_NAME = "base"

    def __init__(self, design: SimDesign):
        if design.family.value != self.FAMILY_NAME:
            raise ValueError(f"{type(self).__name__} cannot run a {design.family.value} design")
        self.design = design

    @abstractmethod
    def sample_x(self, rng: np.random.Generator, times: np.ndarray) -> np.ndarray:
        """Noise-free X-group values of one subject at `times`."""
        pass

    @abstractmethod
    def sample_y(self, rng: np.random.Generator, times: np.ndarray) -> np.ndarray:
        """Noise-free Y-group values of one subject at `times`."""
        pass

    def generate(self, seed: int) -> TwoSampleDataset:
        d = self.design
        x = self._group(replicate_rng(seed, X_STREAM), d.n, "x", self.sample_x, d.sigma1)
        y = self._group(replicate_rng(seed, Y_STREAM), d.m, "y", self.sample_y, d.sigma2)
        return TwoSampleDataset(x, y)

    def _group(self, rng, count: int, prefix: str, sampler, sigma: float) -> List[SubjectRecord]:
        subjects = []
        for i in range(count):
            times = self.schedule(rng)
            values = sampler(rng, times)
            if sigma > 0:
                values = values + rng.normal(0.0, sigma, size=times.size)
            subjects.append(SubjectRecord.from_arrays(f"{prefix}{i + 1:04d}", times, values))
        return subjects

    def schedule(self, rng: np.random.Generator) -> np.ndarray:
        """Observation times of one subject, ascending."""
        d = self.design
        if d.is_dense:
            return np.linspace(0.0, 1.0, d.dense_grid)
        count = int(rng.integers(d.n_low, d.n_high + 1))
        return np.sort(rng.uniform(0.0, 1.0, size=count))

    # --- Shared process shapes ---

    @staticmethod
    def fourier_process(rng: np.random.Generator, times: np.ndarray, scale: float = 1.0) -> np.ndarray:
        """xi1 (-cos 2 pi t) + xi2 sin 2 pi t with standard normal scores; variance scale^2 at every t."""
        xi = rng.standard_normal(2)
        angle = 2.0 * np.pi * times
        return scale * (xi[0] * -np.cos(angle) + xi[1] * np.sin(angle))
