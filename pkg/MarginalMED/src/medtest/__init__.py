"""
medtest - Marginal energy distance testing for sparse functional data.
"""

from .models import RunReport, SimDesign, SubjectRecord, TestResult, TwoSampleDataset
from .permutation import TestConfig, permutation_test
from .pipeline import MedTestRunner, run_med_test
from .smoother import SmootherConfig
from .statistic import med_statistic

__all__ = [
    "SubjectRecord",
    "TwoSampleDataset",
    "SimDesign",
    "TestResult",
    "RunReport",
    "SmootherConfig",
    "TestConfig",
    "med_statistic",
    "permutation_test",
    "run_med_test",
    "MedTestRunner",
]
__version__ = "0.1.0"
