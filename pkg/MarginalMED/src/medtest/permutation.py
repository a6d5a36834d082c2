#!/usr/bin/env python3
"""
Subject-level permutation inference.

Replicate l draws its permutation from its own counter-based stream
derived from (seed, l), so the permuted statistics do not depend on how
replicates are spread over worker processes.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidPermutationError, MedError, ReplicateError
from .models.dataset import TwoSampleDataset
from .models.results import TestResult
from .smoother import SmootherConfig

logger = logging.getLogger(__name__)

# stream key, kept apart from replicate indices (which start at 0)
AUGMENT_STREAM = 0xFFFF_0001


def replicate_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent Philox stream for (seed, *keys)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


def derive_seed(seed: int, *keys: int) -> int:
    """A 63-bit child seed for (seed, *keys)."""
    state = np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


@dataclass(frozen=True)
class TestConfig:
    """Smoother, permutation budget S (observed statistic included), level and seed."""
    smoother: SmootherConfig = field(default_factory=SmootherConfig)
    n_permutations: int = 200
    alpha: float = 0.05
    seed: int = 0
    n_jobs: int = 1
    keep_permuted: bool = True

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.n_permutations < 2:
            raise ValueError(f"n_permutations (S) must be at least 2, got {self.n_permutations}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.n_jobs < 1:
            raise ValueError("n_jobs must be at least 1")
        if self.n_permutations * self.alpha <= 1.0:
            logger.warning("S=%d does not exceed 1/alpha=%.3g; the test cannot reject",
                           self.n_permutations, 1.0 / self.alpha)

    def with_seed(self, seed: int) -> "TestConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return {
            "smoother": self.smoother.to_dict(),
            "n_permutations": self.n_permutations,
            "alpha": self.alpha,
            "seed": self.seed,
        }

    @classmethod
    def from_settings(cls, settings: dict, smoother: Optional[SmootherConfig] = None, **overrides) -> "TestConfig":
        section = dict(settings.get("test", {}))
        section.update({k: v for k, v in overrides.items() if v is not None})
        known = {f for f in cls.__dataclass_fields__} - {"smoother"}
        kwargs = {k: v for k, v in section.items() if k in known}
        return cls(smoother=smoother or SmootherConfig.from_settings(settings), **kwargs)


def validate_permutation(perm: Sequence[int], size: int) -> np.ndarray:
    order = np.asarray(perm)
    if order.ndim != 1 or order.size != size or not np.issubdtype(order.dtype, np.integer):
        raise InvalidPermutationError(f"expected {size} integer indices")
    if not np.array_equal(np.sort(order), np.arange(size)):
        raise InvalidPermutationError("indices are not a bijection on 0..n+m-1")
    return order.astype(np.intp)


def apply_permutation(dataset: TwoSampleDataset, perm: Sequence[int]) -> TwoSampleDataset:
    """
    Reorder the pooled subjects (X first, then Y) by perm: the first n
    become the X group, the rest the Y group. Indices are 0-based.
    """
    order = validate_permutation(perm, dataset.n + dataset.m)
    pooled = dataset.subjects
    reordered = [pooled[i] for i in order]
    return TwoSampleDataset(reordered[:dataset.n], reordered[dataset.n:])


def draw_permutation(seed: int, index: int, size: int) -> np.ndarray:
    """Fisher-Yates shuffle from replicate stream (seed, index)."""
    return replicate_rng(seed, index).permutation(size)


def _run_replicates(sample, statistic: Callable, seed: int, indices: Sequence[int]) -> List[Tuple[int, float]]:
    size = sample.n + sample.m
    out = []
    for index in indices:
        try:
            value = float(statistic(sample.permuted(draw_permutation(seed, index, size))))
        except MedError as e:
            raise ReplicateError(index, e) from e
        out.append((index, value))
    return out


def _chunks(count: int, n_chunks: int) -> List[List[int]]:
    return [list(c) for c in np.array_split(np.arange(count), n_chunks) if len(c)]


def permutation_p_value(observed: float, permuted: Sequence[float]) -> Tuple[float, int]:
    """(1 + #{permuted >= observed}) / S with S = len(permuted) + 1."""
    permuted = np.asarray(permuted, dtype=float)
    n_exceed = int(np.count_nonzero(permuted >= observed))
    return (1 + n_exceed) / (permuted.size + 1), n_exceed


def permutation_test(sample, config: TestConfig, statistic: Callable) -> TestResult:
    """
    Permutation test of the group labels.

    `sample` is a TwoSampleDataset (or any object with n, m and
    permuted(order)); `statistic` must be deterministic and picklable when
    n_jobs > 1.
    """
    observed = float(statistic(sample))
    replicates = config.n_permutations - 1

    if config.n_jobs == 1 or replicates < 2:
        pairs = _run_replicates(sample, statistic, config.seed, range(replicates))
    else:
        pairs = []
        chunks = _chunks(replicates, min(config.n_jobs * 4, replicates))
        with ProcessPoolExecutor(max_workers=config.n_jobs) as executor:
            futures = [executor.submit(_run_replicates, sample, statistic, config.seed, c) for c in chunks]
            for future in futures:
                pairs.extend(future.result())

    pairs.sort(key=lambda p: p[0])
    permuted = [value for _, value in pairs]
    p_value, n_exceed = permutation_p_value(observed, permuted)
    logger.debug("observed %.6g, %d of %d permuted values at or above", observed, n_exceed, replicates)

    return TestResult(
        statistic=observed,
        p_value=p_value,
        reject=p_value <= config.alpha,
        n_permutations=config.n_permutations,
        alpha=config.alpha,
        seed=config.seed,
        permuted_statistics=permuted if config.keep_permuted else None,
        n_exceed=n_exceed,
        config=config.to_dict(),
    )
