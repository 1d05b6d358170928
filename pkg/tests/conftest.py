import sys
from pathlib import Path

import numpy as np
import pytest

from app.logger import shutdown_logger

FIXTURES = Path(__file__).parent / "fixtures"


class ConstantModel:
    def __init__(self, dimension: int = 2, value: float = 3.0):
        self.dimension = dimension
        self.value = value

    def __call__(self, points):
        return np.full(np.atleast_2d(points).shape[0], self.value)


class FunctionModel:
    """Wraps a vectorised function of an (n, d) array."""

    def __init__(self, dimension: int, fn):
        self.dimension = dimension
        self.fn = fn

    def __call__(self, points):
        return self.fn(np.atleast_2d(points))


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def fixture_cmd():
    """Command list running one of the line-protocol fixture scripts."""
    def make(name: str, *args: str) -> list[str]:
        return [sys.executable, str(FIXTURES / name), *args]
    return make


@pytest.fixture
def constant_model():
    return ConstantModel


@pytest.fixture
def function_model():
    return FunctionModel


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def in_tmp(tmp_path, monkeypatch):
    """Run inside a temporary folder so logs and default artifacts stay there."""
    monkeypatch.chdir(tmp_path)
    yield tmp_path
    shutdown_logger()
