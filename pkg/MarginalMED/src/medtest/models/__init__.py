from .dataset import DenseSample, ObservationPoint, SubjectRecord, TwoSampleDataset, Violation
from .design import DesignFamily, SimDesign
from .results import DiagonalCurve, MedBreakdown, NoiseEstimate, RunReport, TestResult

__all__ = [
    "ObservationPoint",
    "SubjectRecord",
    "TwoSampleDataset",
    "DenseSample",
    "Violation",
    "DesignFamily",
    "SimDesign",
    "DiagonalCurve",
    "MedBreakdown",
    "NoiseEstimate",
    "TestResult",
    "RunReport",
]
