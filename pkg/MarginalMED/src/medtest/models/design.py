#!/usr/bin/env python3
"""
Simulation design parameters.
"""

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Optional


class DesignFamily(str, Enum):
    EXAMPLE1 = "example1"
    EXAMPLE2 = "example2"
    GAUSSIAN_SCALE = "gaussian_scale"


@dataclass(frozen=True)
class SimDesign:
    """
    One simulation setting.

    Sparse designs draw N_i uniformly from {n_low..n_high} and times
    uniformly on [0, 1]; setting dense_grid puts every subject on the same
    equally spaced grid instead. sigma1 and sigma2 are the measurement
    error standard deviations of the X and Y groups.
    """
    family: DesignFamily = DesignFamily.EXAMPLE1
    n: int = 100
    m: int = 70
    n_low: int = 2
    n_high: int = 10
    sigma1: float = 0.0
    sigma2: float = 0.0
    mu_s: float = 0.98
    sigma_s: float = 0.199
    dense_grid: Optional[int] = None
    y_scale: float = 2.0
    equal_variance: bool = True

    def __post_init__(self):
        object.__setattr__(self, "family", DesignFamily(self.family))
        if self.n < 2 or self.m < 2:
            raise ValueError(f"both groups need at least 2 subjects, got n={self.n}, m={self.m}")
        if not 1 <= self.n_low <= self.n_high:
            raise ValueError(f"need 1 <= n_low <= n_high, got {self.n_low}..{self.n_high}")
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise ValueError("noise standard deviations must be non-negative")
        if self.dense_grid is not None and self.dense_grid < 2:
            raise ValueError("dense_grid needs at least 2 points")
        if self.y_scale <= 0:
            raise ValueError("y_scale must be positive")
        if self.family is DesignFamily.EXAMPLE2 and self.equal_variance:
            if abs(self.mu_s ** 2 + self.sigma_s ** 2 - 1.0) > 1e-4:
                raise ValueError(
                    f"mu_s^2 + sigma_s^2 = {self.mu_s ** 2 + self.sigma_s ** 2:.6f}, "
                    "expected 1 for equal marginal variances"
                )

    @property
    def is_dense(self) -> bool:
        return self.dense_grid is not None

    @property
    def label(self) -> str:
        """Family name, suffixed with -dense for the regular design."""
        return f"{self.family.value}-dense" if self.is_dense else self.family.value

    def to_dict(self) -> dict:
        out = asdict(self)
        out["family"] = self.family.value
        return out
