#!/usr/bin/env python3
"""
Monte Carlo size and power harness.

Replication r generates its dataset from seed derive_seed(seed, r) and
runs its permutation test under derive_seed(seed, r, 1), so a table row
does not depend on how replications are spread over worker processes.
"""

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import binomtest

from .errors import MedError, ReplicateError
from .generators import build_generator
from .models.dataset import TwoSampleDataset
from .models.design import DesignFamily, SimDesign
from .noise import NoiseMode, med_test_with_noise
from .permutation import TestConfig, derive_seed

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ("(n,m)", "sigma1", "sigma2", "design", "rate", "ci_lo", "ci_hi", "reps")
TEST_STREAM = 1


def gen_example1(design: SimDesign, seed: int) -> TwoSampleDataset:
    if design.family is not DesignFamily.EXAMPLE1:
        raise ValueError(f"expected an example1 design, got {design.family.value}")
    return build_generator(design).generate(seed)


def gen_example2(design: SimDesign, seed: int) -> TwoSampleDataset:
    if design.family is not DesignFamily.EXAMPLE2:
        raise ValueError(f"expected an example2 design, got {design.family.value}")
    return build_generator(design).generate(seed)


def gen_gaussian_scale(design: SimDesign, seed: int) -> TwoSampleDataset:
    if design.family is not DesignFamily.GAUSSIAN_SCALE:
        raise ValueError(f"expected a gaussian_scale design, got {design.family.value}")
    return build_generator(design).generate(seed)


def resolve_noise_mode(design: SimDesign, noise_mode: Optional[Union[str, NoiseMode]]) -> NoiseMode:
    """Augment when the two error levels differ, unless a mode is given."""
    if noise_mode is not None:
        return NoiseMode(noise_mode)
    return NoiseMode.AUGMENT if design.sigma1 != design.sigma2 else NoiseMode.EQUAL_ERRORS


@dataclass
class SimulationResult:
    """Rejection rate of one design with its exact binomial interval."""
    design: SimDesign
    noise_mode: NoiseMode
    seed: int
    reps: int
    rejections: int
    ci: Tuple[float, float]
    p_values: List[float] = field(default_factory=list)
    confidence_level: float = 0.95

    @property
    def rate(self) -> float:
        return self.rejections / self.reps

    def to_row(self) -> dict:
        return {
            "(n,m)": f"({self.design.n},{self.design.m})",
            "sigma1": self.design.sigma1,
            "sigma2": self.design.sigma2,
            "design": self.design.label,
            "rate": self.rate,
            "ci_lo": self.ci[0],
            "ci_hi": self.ci[1],
            "reps": self.reps,
        }

    def to_dict(self) -> dict:
        return {
            "design": self.design.to_dict(),
            "noise_mode": self.noise_mode.value,
            "seed": self.seed,
            "reps": self.reps,
            "rejections": self.rejections,
            "rate": self.rate,
            "ci": list(self.ci),
            "p_values": self.p_values,
        }


def _run_replications(design: SimDesign, test: TestConfig, noise_mode: NoiseMode,
                      seed: int, indices: Sequence[int]) -> List[Tuple[int, float]]:
    generator = build_generator(design)
    equal_errors = noise_mode is not NoiseMode.AUGMENT
    out = []
    for rep in indices:
        try:
            dataset = generator.generate(derive_seed(seed, rep))
            result = med_test_with_noise(dataset, test.with_seed(derive_seed(seed, rep, TEST_STREAM)), equal_errors)
        except MedError as e:
            raise ReplicateError(rep, e, kind="Monte Carlo replication") from e
        out.append((rep, result.p_value))
    return out


def monte_carlo_rejection_rate(design: SimDesign, test: TestConfig, reps: int, seed: int,
                               noise_mode: Optional[Union[str, NoiseMode]] = None,
                               confidence_level: float = 0.95) -> SimulationResult:
    """
    Fraction of replications whose permutation p-value is at most alpha.

    Parallelism comes from test.n_jobs and is spent on replications; each
    replication's own permutation test runs serially.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    mode = resolve_noise_mode(design, noise_mode)
    inner = replace(test, n_jobs=1, keep_permuted=False)
    logger.info("%s (n=%d, m=%d), sigma=(%g, %g), %s, %d reps",
                design.label, design.n, design.m, design.sigma1, design.sigma2, mode.value, reps)

    if test.n_jobs == 1 or reps < 2:
        pairs = _run_replications(design, inner, mode, seed, range(reps))
    else:
        pairs = []
        n_chunks = min(test.n_jobs * 4, reps)
        chunks = [list(c) for c in np.array_split(np.arange(reps), n_chunks) if len(c)]
        with ProcessPoolExecutor(max_workers=test.n_jobs) as executor:
            futures = [executor.submit(_run_replications, design, inner, mode, seed, c) for c in chunks]
            for done, future in enumerate(futures, start=1):
                pairs.extend(future.result())
                logger.debug("chunk %d/%d done", done, len(futures))

    pairs.sort(key=lambda p: p[0])
    p_values = [p for _, p in pairs]
    rejections = sum(p <= test.alpha for p in p_values)
    interval = binomtest(rejections, reps).proportion_ci(confidence_level=confidence_level, method="exact")
    return SimulationResult(
        design=design,
        noise_mode=mode,
        seed=seed,
        reps=reps,
        rejections=rejections,
        ci=(float(interval.low), float(interval.high)),
        p_values=p_values,
        confidence_level=confidence_level,
    )


def simulate_table(rows: Sequence[SimulationResult], out: Optional[Union[str, Path]] = None) -> str:
    """Rejection-rate table as CSV text; also written to `out` when given."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=TABLE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.to_row())
    text = buffer.getvalue()
    if out is not None:
        Path(out).write_text(text)
    return text


def display_simulation(result: SimulationResult):
    """Print one simulation row."""
    d = result.design
    print(f"\n{'=' * 60}")
    print(f"  {d.label.upper()}  (n,m)=({d.n},{d.m})  sigma=({d.sigma1}, {d.sigma2})")
    print(f"{'=' * 60}")
    print(f"    Noise mode: {result.noise_mode.value}")
    print(f"    Rejections: {result.rejections} of {result.reps}")
    print(f"    Rate: {result.rate:.3f}  "
          f"({result.confidence_level:.0%} CI {result.ci[0]:.3f} to {result.ci[1]:.3f})")
