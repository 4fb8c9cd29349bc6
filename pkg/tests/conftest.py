import numpy as np
import pytest

from fracalign.dynamics import SimConfig, evolve
from fracalign.spectral import Field, TorusGrid


@pytest.fixture(scope="session")
def grid256():
    return TorusGrid(256)


@pytest.fixture(scope="session")
def grid64():
    return TorusGrid(64)


def catalog_fields(grid):
    """Smooth test fields used across operator cross-validation tests."""
    x = grid.nodes
    return {
        "sin": Field(grid, np.sin(x)),
        "one_plus_half_cos": Field(grid, 1.0 + 0.5 * np.cos(x)),
        "exp_cos": Field(grid, np.exp(-np.cos(x))),
        "two_modes": Field(grid, np.sin(2 * x) + 0.5 * np.cos(3 * x)),
        "gentle_tanh": Field(grid, 1.0 + 0.5 * np.tanh(np.sin(x) / 0.3)),
    }


@pytest.fixture(scope="session")
def smooth_decay_short():
    """Short canonical run reused by diagnostics/budget tests (t_end = 1)."""
    config = SimConfig(n_points=256, alpha=1.0, t_end=1.0, cfl_number=0.3,
                       output_interval=0.00125, initial_data="smooth_decay")
    return evolve(config)


@pytest.fixture(scope="session")
def smooth_decay_full():
    """The full canonical regression run (t_end = 5); used by acceptance."""
    config = SimConfig(n_points=256, alpha=1.0, t_end=5.0, cfl_number=0.3,
                       output_interval=0.00125, initial_data="smooth_decay",
                       evolve_e_cross_check=True)
    return evolve(config)
