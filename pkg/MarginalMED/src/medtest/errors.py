#!/usr/bin/env python3
"""
Exception hierarchy shared by the library and the CLI.
"""

from typing import List, Optional

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class MedError(Exception):
    """Base class for all medtest failures."""

    exit_code = EXIT_DATA


class DataError(MedError):
    """Input data cannot be used as given."""

    exit_code = EXIT_DATA


class DataFormatError(DataError):
    """A row of an input file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.detail = message
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

    def __reduce__(self):
        return (self.__class__, (self.detail, self.line))


class DatasetValidationError(DataError):
    """A dataset violates one or more structural rules."""

    def __init__(self, violations: List):
        self.violations = list(violations)
        summary = "; ".join(str(v) for v in self.violations[:5])
        if len(self.violations) > 5:
            summary += f"; ... ({len(self.violations)} total)"
        super().__init__(f"invalid dataset: {summary}")

    def __reduce__(self):
        return (self.__class__, (self.violations,))


class GridMismatchError(DataError):
    """Dense curves do not share the expected grid."""


class InvalidPermutationError(DataError):
    """An index array is not a bijection on the pooled subjects."""


class NoCurvesError(DataError):
    """A report was asked to export curves it did not retain."""


class NumericalError(MedError):
    """A numerical stage could not produce a value."""

    exit_code = EXIT_NUMERICAL


class DegenerateWindowError(NumericalError):
    """No pair of observations falls in the (widened) smoothing window."""

    def __init__(self, t: float, grid_index: Optional[int] = None, surface: Optional[str] = None):
        self.t = t
        self.grid_index = grid_index
        self.surface = surface
        where = f"t={t:.6g}"
        if grid_index is not None:
            where += f" (grid index {grid_index})"
        if surface:
            where = f"{surface} at {where}"
        super().__init__(f"empty smoothing window for {where} after bandwidth expansion")

    def __reduce__(self):
        return (self.__class__, (self.t, self.grid_index, self.surface))


class InsufficientPairsError(NumericalError):
    """No subject contributes a within-subject pair of observations."""


class ReplicateError(NumericalError):
    """A permutation or Monte Carlo replicate failed."""

    def __init__(self, index: int, cause: BaseException, kind: str = "permutation replicate"):
        self.index = index
        self.cause = cause
        self.kind = kind
        self.exit_code = getattr(cause, "exit_code", EXIT_NUMERICAL)
        super().__init__(f"{kind} {index} failed: {cause}")

    def __reduce__(self):
        return (self.__class__, (self.index, self.cause, self.kind))


class ConfigError(MedError):
    """A settings file or environment override cannot be used."""

    exit_code = EXIT_USAGE
