import numpy as np
import pytest

from medtest.generators import build_generator
from medtest.models import SimDesign, SubjectRecord, TwoSampleDataset
from medtest.permutation import TestConfig
from medtest.smoother import SmootherConfig


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False,
                     help="run the Monte Carlo acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def subject(sid, times, values):
    return SubjectRecord.from_arrays(sid, times, values)


@pytest.fixture
def micro_dataset():
    """Two subjects per group, times away from the ends of [0, 1]."""
    return TwoSampleDataset(
        [
            subject("x1", [0.1, 0.5, 0.9], [0.3, -1.2, 0.8]),
            subject("x2", [0.3, 0.7], [1.1, 0.4]),
        ],
        [
            subject("y1", [0.2, 0.6], [-0.5, 2.0]),
            subject("y2", [0.4, 0.8, 0.95], [0.7, -0.1, 1.6]),
        ],
    )


@pytest.fixture
def sparse_dataset():
    """Example 1 draw, 40 subjects per group."""
    return build_generator(SimDesign(family="example1", n=40, m=40)).generate(7)


@pytest.fixture
def constant_dataset(sparse_dataset):
    return sparse_dataset.map_values(lambda v: np.full_like(v, 5.0))


@pytest.fixture
def fast_smoother():
    return SmootherConfig(h_x=0.25, h_y=0.25, grid_size=21)


@pytest.fixture
def fast_config(fast_smoother):
    return TestConfig(smoother=fast_smoother, n_permutations=20, alpha=0.05, seed=11)
