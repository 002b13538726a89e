"""Shared pytest fixtures for FracTK."""
import math
import os
import sys

import pytest

# modules import each other flat (`from config import settings`), as when run from this directory
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from geometry.classical import ClassicalParams  # noqa: E402
from geometry.prefractal import classical_pair, square_pair  # noqa: E402

KOCH_BETA = math.pi / 6.0


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: deep prefractal levels (deselect with -m 'not slow')")


@pytest.fixture(scope="session")
def koch() -> ClassicalParams:
    return ClassicalParams(KOCH_BETA)


@pytest.fixture(scope="session")
def koch_pair_1(koch):
    return classical_pair(koch, 1)


@pytest.fixture(scope="session")
def koch_pair_2(koch):
    return classical_pair(koch, 2)


@pytest.fixture(scope="session")
def square_pair_1():
    return square_pair(1)


@pytest.fixture(scope="session")
def square_pair_2():
    return square_pair(2)
