"""Shared pytest fixtures for the LevyLab test suite"""

import os
import sys

os.environ.setdefault('LEVYLAB_ENV', 'testing')
os.environ.setdefault('LEVYLAB_PROGRESS', 'false')

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from core.drift import neg_identity, zero_drift  # noqa: E402
from core.measures import factorial_atoms, finite_atoms, geometric_atoms, stable_measure  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo acceptance runs (deselect with -m 'not slow')")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def geometric_e():
    """sum_n delta_{e^-n}"""
    return geometric_atoms(np.e)


@pytest.fixture
def factorial():
    return factorial_atoms()


@pytest.fixture
def stable_one():
    return stable_measure(1.0)


@pytest.fixture
def unit_atom():
    """One unit jump per unit time"""
    return finite_atoms([[1.0]], [1.0])


@pytest.fixture
def contraction():
    return neg_identity(1)


@pytest.fixture
def no_drift():
    return zero_drift(1)
