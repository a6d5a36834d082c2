#!/usr/bin/env python3
"""
Result containers: smoothed curves, statistic breakdowns, test outcomes
and run reports. Every container serializes to plain JSON-ready dicts.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np


@dataclass(eq=False)
class DiagonalCurve:
    """A smoothed quantity evaluated on a uniform grid of [0, 1]."""
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape:
            raise ValueError(f"grid and values differ in length: {self.grid.shape} vs {self.values.shape}")
        if self.grid.size > 1 and np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")

    def __len__(self) -> int:
        return self.grid.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiagonalCurve):
            return NotImplemented
        return np.array_equal(self.grid, other.grid) and np.array_equal(self.values, other.values)

    def to_dict(self) -> dict:
        return {"grid": self.grid.tolist(), "values": self.values.tolist()}

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["t", "value"])
            for t, v in zip(self.grid, self.values):
                writer.writerow([repr(float(t)), repr(float(v))])
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "DiagonalCurve":
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
        return cls(
            grid=np.array([float(r["t"]) for r in rows]),
            values=np.array([float(r["value"]) for r in rows]),
        )


@dataclass(eq=False)
class MedBreakdown:
    """The three diagonal curves and the integrated statistic."""
    g1_curve: DiagonalCurve
    g2_curve: DiagonalCurve
    g3_curve: DiagonalCurve
    statistic: float
    config: dict = field(default_factory=dict)

    @property
    def grid(self) -> np.ndarray:
        return self.g1_curve.grid

    @property
    def integrand(self) -> DiagonalCurve:
        values = 2.0 * self.g1_curve.values - (self.g2_curve.values + self.g3_curve.values)
        return DiagonalCurve(self.grid, values)

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "grid": self.grid.tolist(),
            "g1": self.g1_curve.values.tolist(),
            "g2": self.g2_curve.values.tolist(),
            "g3": self.g3_curve.values.tolist(),
            "config": self.config,
        }


@dataclass(eq=False)
class TestResult:
    """Outcome of one permutation test."""
    statistic: float
    p_value: float
    reject: bool
    n_permutations: int
    alpha: float
    seed: int
    permuted_statistics: Optional[List[float]] = None
    n_exceed: int = 0
    config: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "reject": self.reject,
            "n_permutations": self.n_permutations,
            "n_exceed": self.n_exceed,
            "alpha": self.alpha,
            "seed": self.seed,
            "permuted_statistics": self.permuted_statistics,
            "config": self.config,
        }

    def summary(self) -> str:
        decision = "reject H0" if self.reject else "do not reject H0"
        return (f"statistic={self.statistic:.6g}  p={self.p_value:.4g} "
                f"(S={self.n_permutations}, alpha={self.alpha})  -> {decision}")


@dataclass(eq=False)
class NoiseEstimate:
    """Per-group measurement-error variances and the curves behind them."""
    sigma2_x: float
    sigma2_y: float
    mean_curve_x: Optional[DiagonalCurve] = None
    mean_curve_y: Optional[DiagonalCurve] = None
    cov_diag_x: Optional[DiagonalCurve] = None
    cov_diag_y: Optional[DiagonalCurve] = None
    raw_diag_x: Optional[DiagonalCurve] = None
    raw_diag_y: Optional[DiagonalCurve] = None

    @property
    def augmentation_variance(self) -> float:
        return abs(self.sigma2_y - self.sigma2_x)

    def curves(self) -> Dict[str, DiagonalCurve]:
        named = {
            "mean_x": self.mean_curve_x, "mean_y": self.mean_curve_y,
            "cov_diag_x": self.cov_diag_x, "cov_diag_y": self.cov_diag_y,
            "raw_diag_x": self.raw_diag_x, "raw_diag_y": self.raw_diag_y,
        }
        return {k: v for k, v in named.items() if v is not None}

    def to_dict(self) -> dict:
        return {"sigma2_x": self.sigma2_x, "sigma2_y": self.sigma2_y}


@dataclass(eq=False)
class RunReport:
    """Everything needed to replay one end-to-end test run."""
    input_digest: str
    noise_mode: str
    config: dict
    result: Optional[TestResult] = None
    noise: Optional[NoiseEstimate] = None
    augmentation_seed: Optional[int] = None
    curves: Optional[MedBreakdown] = None
    stages: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    error: Optional[str] = None

    def to_dict(self, include_timings: bool = True) -> dict:
        out = {
            "input_digest": self.input_digest,
            "noise_mode": self.noise_mode,
            "config": self.config,
            "stages": self.stages,
            "augmentation_seed": self.augmentation_seed,
            "noise": self.noise.to_dict() if self.noise else None,
            "result": self.result.to_dict() if self.result else None,
            "curves": self.curves.to_dict() if self.curves else None,
            "error": self.error,
        }
        if include_timings:
            out["timings"] = self.timings
        return out

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2, sort_keys=True, default=str)
