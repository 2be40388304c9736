"""
Pytest configuration and shared fixtures for starshape tests.
"""

import math
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from measures import MeasureSpec
from scenario_core import EmpiricalDistribution, RandomVariable


class SqrtAbsMean(MeasureSpec):
    """Test-only functional sqrt(|E X|): monotone on no side, not star-shaped."""

    def evaluate_law(self, d):
        return math.sqrt(abs(d.mean))

    def render(self):
        return "sqrt-abs-mean"


class Variance(MeasureSpec):
    """Test-only functional Var(X): law-invariant but not monotone."""

    def evaluate_law(self, d):
        mean = d.mean
        return math.fsum(w * (v - mean) ** 2 for v, w in d.atoms)

    def render(self):
        return "variance"


@pytest.fixture
def fixture_path() -> Path:
    """Return the path to the test fixtures directory."""
    return Path(__file__).parent / "fixtures"


@pytest.fixture
def u1234_csv(fixture_path) -> Path:
    """Uniform scenarios 1, 2, 3, 4."""
    return fixture_path / "u1234.csv"


@pytest.fixture
def minus1_2_csv(fixture_path) -> Path:
    """Uniform scenarios -1, 2."""
    return fixture_path / "minus1_2.csv"


@pytest.fixture
def weighted_csv(fixture_path) -> Path:
    """Header plus two weighted scenarios (1 w.p. 0.25, 2 w.p. 0.75)."""
    return fixture_path / "weighted.csv"


@pytest.fixture
def u01_csv(fixture_path) -> Path:
    return fixture_path / "u01.csv"


@pytest.fixture
def u02_csv(fixture_path) -> Path:
    return fixture_path / "u02.csv"


@pytest.fixture
def write_csv(tmp_path) -> Callable[[str, str], Path]:
    """Write CSV text to a file under tmp_path and return its path."""
    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write


@pytest.fixture
def law() -> Callable[..., EmpiricalDistribution]:
    """Build an EmpiricalDistribution, uniform when no weights are given."""
    def _law(values: Sequence[float], weights: Optional[Sequence[float]] = None):
        if weights is None:
            weights = [1.0 / len(values)] * len(values)
        return EmpiricalDistribution.from_atoms(values, weights)
    return _law


@pytest.fixture
def rv() -> Callable[..., RandomVariable]:
    """Build a RandomVariable, uniform when no probabilities are given."""
    def _rv(values: Sequence[float], probabilities: Optional[Sequence[float]] = None):
        return RandomVariable.from_values(values, probabilities)
    return _rv


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for randomized tests."""
    return np.random.default_rng(20240611)


@pytest.fixture
def sqrt_abs_mean() -> MeasureSpec:
    return SqrtAbsMean()


@pytest.fixture
def variance_measure() -> MeasureSpec:
    return Variance()
