import numpy as np
import pytest

from dmnls.dispersion import DispersionProfile, build_quadrature
from dmnls.grid import Field, Grid


@pytest.fixture
def grid():
    return Grid(512, 40.0)


@pytest.fixture
def gaussian(grid):
    """Width-1 Gaussian test field, amplitude 0.3."""
    return Field(grid, (0.3 * np.exp(-grid.x**2)).astype(complex), "position")


@pytest.fixture
def tent_profile():
    return DispersionProfile.default()


@pytest.fixture
def quad16(tent_profile):
    return build_quadrature(tent_profile, 16)
