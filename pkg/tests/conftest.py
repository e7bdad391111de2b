"""Configure pytest for the test suite."""

import os
from fractions import Fraction

import pytest

from northcott_towers.heights import RadicalTower


@pytest.fixture(autouse=True)
def setup_test_env():
    """Set up test environment variables for all tests."""
    old_env = dict(os.environ)
    os.environ.update(
        {
            "ENVIRONMENT": "development",
            "LOG_LEVEL": "DEBUG",
            "NORTHCOTT_TOL": "1e-9",
            "NORTHCOTT_PRECISION_BITS": "96",
            "NORTHCOTT_PRECISION_CEILING": "2048",
            "NORTHCOTT_ORDERING": "weak",
            "NORTHCOTT_SEED": "0",
        }
    )
    yield
    os.environ.clear()
    os.environ.update(old_env)


@pytest.fixture
def tol():
    """Default enclosure width used across the numeric tests."""
    return Fraction(1, 10**9)


@pytest.fixture
def small_tower():
    """Q(5^(1/3), 7^(1/2)): degree 6, every prime used once."""
    return RadicalTower.from_pairs([(5, 3), (7, 2)])


@pytest.fixture
def above_tower():
    """The first three steps of the house-above construction for t = 2."""
    return RadicalTower.from_pairs([(251, 7), (2309, 11), (8293, 13)])
