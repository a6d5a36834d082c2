#!/usr/bin/env python3
"""
Reading, writing and checking two-sample functional data.

Long format (one observation per row):

    subject_id,group,time,value
    s01,x,0.12,1.7
    s01,x,0.55,0.3
    s02,y,0.40,-0.9

Wide format (dense curves on one shared grid; header cells after the
group column are the grid times):

    subject_id,group,0.0,0.25,0.5,0.75,1.0
"""

import csv
import io
import math
from collections import OrderedDict
from typing import IO, Dict, List, Tuple, Union

import numpy as np

from .errors import DataFormatError, DatasetValidationError
from .models.dataset import DenseSample, SubjectRecord, TwoSampleDataset, Violation
from .permutation import replicate_rng

LONG_COLUMNS = ("subject_id", "group", "time", "value")
GROUPS = ("x", "y")

TextInput = Union[str, IO[str]]


def _as_stream(text: TextInput) -> IO[str]:
    if isinstance(text, str):
        return io.StringIO(text)
    return text


def _parse_float(raw: str, column: str, line: int) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise DataFormatError(f"{column} is not a number: {raw!r}", line)
    if not math.isfinite(value):
        raise DataFormatError(f"{column} is not finite: {raw!r}", line)
    return value


def parse_long_csv(text: TextInput, raw_time: bool = False) -> TwoSampleDataset:
    """
    Parse a long/tidy CSV into a dataset.

    Rows of one subject are gathered in file order. Group labels are
    case-insensitive. With raw_time, times outside [0, 1] are accepted so
    the caller can rescale them.
    """
    reader = csv.reader(_as_stream(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError("empty input, header required", 1)

    columns = [c.strip().lower() for c in header]
    missing = [c for c in LONG_COLUMNS if c not in columns]
    if missing:
        raise DataFormatError(f"header lacks column(s): {', '.join(missing)}", 1)
    index = {c: columns.index(c) for c in LONG_COLUMNS}

    rows: "OrderedDict[str, Tuple[str, List[float], List[float]]]" = OrderedDict()
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(columns):
            raise DataFormatError(f"expected {len(columns)} fields, found {len(row)}", line)

        subject_id = row[index["subject_id"]].strip()
        if not subject_id:
            raise DataFormatError("empty subject_id", line)
        group = row[index["group"]].strip().lower()
        if group not in GROUPS:
            raise DataFormatError(f"group must be x or y, found {row[index['group']]!r}", line)
        time = _parse_float(row[index["time"]], "time", line)
        value = _parse_float(row[index["value"]], "value", line)
        if not raw_time and not 0.0 <= time <= 1.0:
            raise DataFormatError(f"time out of [0,1]: {time!r}", line)

        if subject_id not in rows:
            rows[subject_id] = (group, [], [])
        known_group, times, values = rows[subject_id]
        if known_group != group:
            raise DataFormatError(f"subject {subject_id} appears in both groups", line)
        times.append(time)
        values.append(value)

    x_subjects = [SubjectRecord.from_arrays(sid, t, v) for sid, (g, t, v) in rows.items() if g == "x"]
    y_subjects = [SubjectRecord.from_arrays(sid, t, v) for sid, (g, t, v) in rows.items() if g == "y"]
    if not x_subjects:
        raise DataFormatError("group x is empty")
    if not y_subjects:
        raise DataFormatError("group y is empty")
    return TwoSampleDataset(x_subjects, y_subjects)


def serialize_long_csv(dataset: TwoSampleDataset) -> str:
    """Write a dataset in long format; floats round-trip exactly."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(LONG_COLUMNS)
    for group, subjects in (("x", dataset.x_subjects), ("y", dataset.y_subjects)):
        for subject in subjects:
            for point in subject.points:
                writer.writerow([subject.id, group, repr(point.time), repr(point.value)])
    return out.getvalue()


def load_dataset(path: str, raw_time: bool = False) -> TwoSampleDataset:
    with open(path, newline="", encoding="utf-8") as f:
        return parse_long_csv(f, raw_time=raw_time)


def rescale_time(dataset: TwoSampleDataset, lo: float, hi: float) -> TwoSampleDataset:
    """Map every time t to (t - lo) / (hi - lo); values are untouched."""
    if not lo < hi:
        raise ValueError(f"rescale needs lo < hi, got lo={lo}, hi={hi}")
    span = hi - lo

    def rescale(subject: SubjectRecord) -> SubjectRecord:
        times = subject.times
        if np.any(times < lo) or np.any(times > hi):
            raise DataFormatError(f"subject {subject.id}: time outside [{lo}, {hi}]")
        scaled = np.clip((times - lo) / span, 0.0, 1.0)
        return subject.with_times(scaled)

    return TwoSampleDataset(
        [rescale(s) for s in dataset.x_subjects],
        [rescale(s) for s in dataset.y_subjects],
    )


def observed_time_range(dataset: TwoSampleDataset) -> Tuple[float, float]:
    times = np.concatenate([s.times for s in dataset.subjects if s.n_points])
    return float(times.min()), float(times.max())


def validate_dataset(dataset: TwoSampleDataset) -> List[Violation]:
    """Return every broken rule; an empty list means the dataset is usable."""
    violations: List[Violation] = []
    if dataset.n < 2:
        violations.append(Violation("n ≥ 2"))
    if dataset.m < 2:
        violations.append(Violation("m ≥ 2"))

    seen: Dict[str, int] = {}
    for subject in dataset.subjects:
        seen[subject.id] = seen.get(subject.id, 0) + 1
        if subject.n_points < 1:
            violations.append(Violation("N_i ≥ 1", subject.id))
            continue
        times, values = subject.times, subject.values
        if not np.all(np.isfinite(times)):
            violations.append(Violation("time is not finite", subject.id))
        elif np.any(times < 0.0) or np.any(times > 1.0):
            violations.append(Violation("time out of [0,1]", subject.id))
        if not np.all(np.isfinite(values)):
            violations.append(Violation("value is not finite", subject.id))

    for subject_id, count in seen.items():
        if count > 1:
            violations.append(Violation("duplicate subject id", subject_id))
    return violations


def require_valid(dataset: TwoSampleDataset) -> TwoSampleDataset:
    violations = validate_dataset(dataset)
    if violations:
        raise DatasetValidationError(violations)
    return dataset


def sparsify(dataset: TwoSampleDataset, n_low: int, n_high: int, seed: int) -> TwoSampleDataset:
    """Keep a random subset of N_i ~ U{n_low..min(n_high, N_i)} points per subject."""
    if not 1 <= n_low <= n_high:
        raise ValueError(f"need 1 <= n_low <= n_high, got {n_low}, {n_high}")
    rng = replicate_rng(seed, 0x5BA5)

    def thin(subject: SubjectRecord) -> SubjectRecord:
        upper = min(n_high, subject.n_points)
        lower = min(n_low, upper)
        keep = int(rng.integers(lower, upper + 1))
        chosen = np.sort(rng.choice(subject.n_points, size=keep, replace=False))
        return SubjectRecord(subject.id, tuple(subject.points[i] for i in chosen))

    return TwoSampleDataset(
        [thin(s) for s in dataset.x_subjects],
        [thin(s) for s in dataset.y_subjects],
    )


def parse_wide_csv(text: TextInput) -> DenseSample:
    """Parse dense curves on a shared grid (grid times in the header)."""
    reader = csv.reader(_as_stream(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError("empty input, header required", 1)
    if len(header) < 4 or [c.strip().lower() for c in header[:2]] != ["subject_id", "group"]:
        raise DataFormatError("header must start with subject_id,group followed by grid times", 1)
    grid = np.array([_parse_float(c, "grid time", 1) for c in header[2:]])
    if np.any(np.diff(grid) <= 0):
        raise DataFormatError("grid times must be strictly increasing", 1)

    x_rows, y_rows, x_ids, y_ids = [], [], [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise DataFormatError(f"expected {len(header)} fields, found {len(row)}", line)
        group = row[1].strip().lower()
        if group not in GROUPS:
            raise DataFormatError(f"group must be x or y, found {row[1]!r}", line)
        values = [_parse_float(c, "value", line) for c in row[2:]]
        if group == "x":
            x_rows.append(values)
            x_ids.append(row[0].strip())
        else:
            y_rows.append(values)
            y_ids.append(row[0].strip())
    if not x_rows or not y_rows:
        raise DataFormatError("both groups need at least one curve")
    return DenseSample(grid, np.array(x_rows), np.array(y_rows), x_ids, y_ids)


def serialize_wide_csv(sample: DenseSample) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["subject_id", "group"] + [repr(float(t)) for t in sample.grid])
    for group, ids, curves in (("x", sample.x_ids, sample.x_curves), ("y", sample.y_ids, sample.y_curves)):
        for sid, row in zip(ids, curves):
            writer.writerow([sid, group] + [repr(float(v)) for v in row])
    return out.getvalue()
