import numpy as np
import pytest

from homodyne_lab.waveform_lab import (
    GridSpec,
    gaussian_wavefunction,
    random_wavefunction,
)


@pytest.fixture(scope="session")
def grid16():
    """Default verification grid: wide enough for t<=2 flows and delta<=2 states."""
    return GridSpec.centered(16.0, 4096)


@pytest.fixture(scope="session")
def grid20():
    return GridSpec.centered(20.0, 4096)


@pytest.fixture(scope="session")
def unit_gaussian(grid16):
    """|psi|^2 = N(0, 1)."""
    return gaussian_wavefunction(grid16, variance=1.0)


@pytest.fixture(scope="session")
def random_family(grid20):
    """Small seeded family of hermite superpositions for property checks."""
    return [random_wavefunction(123, i, grid20) for i in range(12)]


def riemann(values, dx):
    return float(np.sum(values) * dx)
