#!/usr/bin/env python3
"""
End-to-end test runs on ingested data.
Validates, optionally augments, computes the MED breakdown and runs the
permutation test, recording every seed and stage needed to replay a run.
"""

import hashlib
import logging
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, List, Optional, Union

from .bench import SimulationResult, monte_carlo_rejection_rate
from .dataio import require_valid, serialize_long_csv
from .errors import MedError, NoCurvesError
from .models.dataset import DenseSample, TwoSampleDataset
from .models.design import SimDesign
from .models.results import NoiseEstimate, RunReport, TestResult
from .noise import NoiseMode, augment_for_test, estimate_noise
from .permutation import TestConfig, permutation_test
from .settings import load_settings
from .smoother import SmootherConfig
from .statistic import DenseEnergyStatistic, MedStatistic, med_statistic

logger = logging.getLogger(__name__)

CURVE_FILES = ("g1.csv", "g2.csv", "g3.csv", "integrand.csv")


def dataset_digest(dataset: TwoSampleDataset) -> str:
    """sha256 of the canonical long-format serialization."""
    return hashlib.sha256(serialize_long_csv(dataset).encode("utf-8")).hexdigest()


@contextmanager
def _stage(report: RunReport, name: str):
    start = time.perf_counter()
    try:
        yield
    finally:
        report.timings[name] = time.perf_counter() - start
    report.stages.append(name)
    logger.debug("stage %s done in %.3fs", name, report.timings[name])


def run_med_test(dataset: TwoSampleDataset, config: TestConfig,
                 noise_mode: Union[str, NoiseMode] = NoiseMode.EQUAL_ERRORS,
                 keep_curves: bool = True) -> RunReport:
    """
    Run the MED permutation test and return its report.

    `none` and `equal_errors` test the observed data as is; `augment`
    estimates both error variances and augments the less noisy group once
    before testing. On failure the partial report is attached to the
    raised MedError as `report`.
    """
    mode = NoiseMode(noise_mode)
    report = RunReport(input_digest=dataset_digest(dataset), noise_mode=mode.value, config=config.to_dict())
    try:
        with _stage(report, "validate"):
            require_valid(dataset)

        if mode is NoiseMode.AUGMENT:
            with _stage(report, "augment"):
                dataset, report.noise, report.augmentation_seed = augment_for_test(dataset, config)

        with _stage(report, "statistic"):
            breakdown = med_statistic(dataset, config.smoother)
            if keep_curves:
                report.curves = breakdown

        with _stage(report, "permutation"):
            report.result = permutation_test(dataset, config, MedStatistic(config.smoother))
    except MedError as e:
        report.error = str(e)
        e.report = report
        raise
    return report


def export_curves(report: RunReport, path: Union[str, Path]) -> List[Path]:
    """Write g1.csv, g2.csv, g3.csv and integrand.csv (2 g1 - g2 - g3) under path."""
    if report.curves is None:
        raise NoCurvesError("the report holds no diagonal curves; rerun with curves retained")
    out_dir = Path(path)
    out_dir.mkdir(parents=True, exist_ok=True)
    curves = report.curves
    written = []
    for name, curve in zip(CURVE_FILES, (curves.g1_curve, curves.g2_curve, curves.g3_curve, curves.integrand)):
        written.append(curve.to_csv(out_dir / name))
    return written


class MedTestRunner:
    """Settings-aware front end for test, noise, dense and simulation runs."""

    def __init__(self, config_path: Optional[str] = None, environ: Optional[Dict[str, str]] = None):
        self.settings = load_settings(config_path, environ)

    def smoother_config(self, **overrides) -> SmootherConfig:
        return SmootherConfig.from_settings(self.settings, **overrides)

    def test_config(self, smoother: Optional[SmootherConfig] = None, **overrides) -> TestConfig:
        return TestConfig.from_settings(self.settings, smoother=smoother or self.smoother_config(), **overrides)

    @property
    def default_noise_mode(self) -> NoiseMode:
        return NoiseMode(self.settings.get("pipeline", {}).get("noise_mode", NoiseMode.EQUAL_ERRORS.value))

    def run(self, dataset: TwoSampleDataset, config: Optional[TestConfig] = None,
            noise_mode: Optional[Union[str, NoiseMode]] = None) -> RunReport:
        config = config or self.test_config()
        mode = NoiseMode(noise_mode) if noise_mode is not None else self.default_noise_mode
        print(f"\nTesting marginal homogeneity: {dataset}, noise mode {mode.value}, "
              f"S={config.n_permutations}...\n")
        return run_med_test(dataset, config, mode)

    def noise(self, dataset: TwoSampleDataset, smoother: Optional[SmootherConfig] = None) -> NoiseEstimate:
        return estimate_noise(require_valid(dataset), smoother or self.smoother_config())

    def dense_test(self, sample: DenseSample, config: Optional[TestConfig] = None) -> TestResult:
        config = config or self.test_config()
        print(f"\nDense energy distance test: n={sample.n}, m={sample.m}, "
              f"{sample.grid.size} grid points, S={config.n_permutations}...\n")
        return permutation_test(sample, config, DenseEnergyStatistic())

    @property
    def dense_grid_default(self) -> int:
        return int(self.settings.get("simulate", {}).get("dense_grid", 51))

    def design(self, family: str, n: int, m: int, **overrides) -> SimDesign:
        """Simulation design from the simulate settings; sparse unless dense_grid is overridden."""
        section = self.settings.get("simulate", {})
        known = set(SimDesign.__dataclass_fields__)
        kwargs = {k: v for k, v in section.items() if k in known and k != "dense_grid"}
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return SimDesign(family=family, n=n, m=m, **kwargs)

    def simulate(self, design: SimDesign, reps: Optional[int] = None, seed: Optional[int] = None,
                 config: Optional[TestConfig] = None,
                 noise_mode: Optional[Union[str, NoiseMode]] = None) -> SimulationResult:
        config = config or self.test_config()
        if reps is None:
            section = self.settings.get("simulate", {})
            key = "size_reps" if design.family.value == "example1" else "power_reps"
            reps = int(section.get(key, 100))
        seed = config.seed if seed is None else seed
        print(f"\nSimulating {design.label} (n,m)=({design.n},{design.m}), {reps} reps...\n")
        return monte_carlo_rejection_rate(design, config, reps, seed, noise_mode)


def display_report(report: RunReport):
    """Display a run report in a formatted way."""
    print(f"\n{'=' * 60}")
    print(f"  MARGINAL ENERGY DISTANCE TEST")
    print(f"{'=' * 60}")
    print(f"    Input: sha256 {report.input_digest[:16]}...")
    print(f"    Noise mode: {report.noise_mode}")
    if report.noise is not None:
        print(f"    Error variances: x={report.noise.sigma2_x:.6g}, y={report.noise.sigma2_y:.6g}")
        print(f"    Added to the less noisy group: variance {report.noise.augmentation_variance:.6g}")
        print(f"    Augmentation seed: {report.augmentation_seed}")
    if report.result is not None:
        print(f"    {report.result.summary()}")
    if report.error:
        print(f"    Failed after stages {', '.join(report.stages) or '(none)'}: {report.error}")
    if report.timings:
        total = sum(report.timings.values())
        print(f"    Time: {total:.2f}s ({', '.join(f'{k} {v:.2f}s' for k, v in report.timings.items())})")
