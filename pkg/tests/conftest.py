import numpy as np
import pytest

from smallball import Curve, FunctionalSample, Grid, SeededRng


@pytest.fixture
def unit_grid() -> Grid:
    return Grid.uniform(0.0, 1.0, 100)


@pytest.fixture
def sine_grid() -> Grid:
    return Grid.uniform(0.0, np.pi, 100)


def make_curve(grid: Grid, fn) -> Curve:
    return Curve(grid, fn(grid.points))


def make_sample(grid: Grid, rows: np.ndarray) -> FunctionalSample:
    return FunctionalSample(grid, rows)


@pytest.fixture
def rng0() -> SeededRng:
    return SeededRng(seed=12345, stream=0)
