import numpy as np
import pytest

from swil.construction import index_family
from swil.grid import Field2D, GridSpec, fft2o


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def small_grid():
    return GridSpec(points_per_axis=64, period_scale=16.0)


@pytest.fixture
def coarse_grid():
    return GridSpec(points_per_axis=32, period_scale=4.0)


@pytest.fixture(scope="session")
def fam8():
    return index_family(8)


def make_mean_free_field(grid, rng, max_index=None, real=True):
    """Band-limited random field with zero mean, spectrally supported under
    the dealias cutoff so products stay exact."""
    if max_index is None:
        max_index = grid.dealias_index // 2
    n = grid.points_per_axis
    phys = rng.standard_normal((n, n))
    if not real:
        phys = phys + 1j * rng.standard_normal((n, n))
    spec = fft2o(phys.astype(np.complex128))
    keep = np.abs(grid.index_1d) <= max_index
    spec *= keep[:, None] * keep[None, :]
    spec[0, 0] = 0.0
    return Field2D.spectral(grid, spec)


@pytest.fixture
def mean_free_field(small_grid, rng):
    return make_mean_free_field(small_grid, rng)
