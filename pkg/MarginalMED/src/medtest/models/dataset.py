#!/usr/bin/env python3
"""
Sparse functional two-sample data model.

Each subject carries its own irregular schedule of (time, value) pairs.
Subjects travel as whole records: permutations, augmentation and
sparsification never split a subject's times from its values.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class ObservationPoint:
    """One observation: rescaled design time and (possibly noisy) value."""
    time: float
    value: float


@dataclass(frozen=True)
class SubjectRecord:
    """One subject's observation schedule."""
    id: str
    points: Tuple[ObservationPoint, ...] = ()

    @classmethod
    def from_arrays(cls, subject_id: str, times: Iterable[float], values: Iterable[float]) -> "SubjectRecord":
        points = tuple(ObservationPoint(float(t), float(v)) for t, v in zip(times, values))
        return cls(id=subject_id, points=points)

    @property
    def n_points(self) -> int:
        return len(self.points)

    @cached_property
    def times(self) -> np.ndarray:
        return np.array([p.time for p in self.points], dtype=float)

    @cached_property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points], dtype=float)

    def with_values(self, values: Sequence[float]) -> "SubjectRecord":
        return SubjectRecord.from_arrays(self.id, self.times, values)

    def with_times(self, times: Sequence[float]) -> "SubjectRecord":
        return SubjectRecord.from_arrays(self.id, times, self.values)


@dataclass(frozen=True)
class TwoSampleDataset:
    """X-group and Y-group subjects; the unit of permutation."""
    x_subjects: Tuple[SubjectRecord, ...]
    y_subjects: Tuple[SubjectRecord, ...]

    def __post_init__(self):
        # accept lists from callers, store tuples
        object.__setattr__(self, "x_subjects", tuple(self.x_subjects))
        object.__setattr__(self, "y_subjects", tuple(self.y_subjects))

    @property
    def n(self) -> int:
        return len(self.x_subjects)

    @property
    def m(self) -> int:
        return len(self.y_subjects)

    @property
    def subjects(self) -> Tuple[SubjectRecord, ...]:
        """Pooled subjects, X group first."""
        return self.x_subjects + self.y_subjects

    @property
    def total_points(self) -> int:
        return sum(s.n_points for s in self.subjects)

    def permuted(self, order: Sequence[int]) -> "TwoSampleDataset":
        from ..permutation import apply_permutation
        return apply_permutation(self, order)

    def swapped(self) -> "TwoSampleDataset":
        return TwoSampleDataset(self.y_subjects, self.x_subjects)

    def map_values(self, fn) -> "TwoSampleDataset":
        """Apply an elementwise transform to every observed value."""
        return TwoSampleDataset(
            [s.with_values(fn(s.values)) for s in self.x_subjects],
            [s.with_values(fn(s.values)) for s in self.y_subjects],
        )

    def __str__(self) -> str:
        return f"TwoSampleDataset(n={self.n}, m={self.m}, points={self.total_points})"


@dataclass(frozen=True)
class Violation:
    """One broken dataset rule."""
    rule: str
    subject_id: Optional[str] = None

    def __str__(self) -> str:
        if self.subject_id is None:
            return self.rule
        return f"{self.subject_id}: {self.rule}"


@dataclass(eq=False)
class DenseSample:
    """Fully observed curves on one shared grid."""
    grid: np.ndarray
    x_curves: np.ndarray
    y_curves: np.ndarray
    x_ids: List[str] = field(default_factory=list)
    y_ids: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.x_curves = np.atleast_2d(np.asarray(self.x_curves, dtype=float))
        self.y_curves = np.atleast_2d(np.asarray(self.y_curves, dtype=float))
        if not self.x_ids:
            self.x_ids = [f"x{i + 1:04d}" for i in range(len(self.x_curves))]
        if not self.y_ids:
            self.y_ids = [f"y{i + 1:04d}" for i in range(len(self.y_curves))]

    @property
    def n(self) -> int:
        return self.x_curves.shape[0]

    @property
    def m(self) -> int:
        return self.y_curves.shape[0]

    def permuted(self, order: Sequence[int]) -> "DenseSample":
        from ..permutation import validate_permutation
        order = validate_permutation(order, self.n + self.m)
        pooled = np.vstack([self.x_curves, self.y_curves])[order]
        ids = (self.x_ids + self.y_ids)
        ids = [ids[i] for i in order]
        return DenseSample(self.grid, pooled[:self.n], pooled[self.n:], ids[:self.n], ids[self.n:])

    def to_dataset(self) -> TwoSampleDataset:
        return TwoSampleDataset(
            [SubjectRecord.from_arrays(sid, self.grid, row) for sid, row in zip(self.x_ids, self.x_curves)],
            [SubjectRecord.from_arrays(sid, self.grid, row) for sid, row in zip(self.y_ids, self.y_curves)],
        )
