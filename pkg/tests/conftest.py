import numpy as np
import pytest

from mrcscat import (
    BasisSet,
    IncidentWave,
    build_surface,
    minimize_functional,
    quad_grid,
)


@pytest.fixture(scope="session")
def wave_x():
    """k=1 plane wave along +x (the reference configuration)."""
    return IncidentWave(k=1.0, alpha=np.array([1.0, 0.0, 0.0]))


@pytest.fixture(scope="session")
def unit_sphere():
    return build_surface({"type": "sphere", "radius": 1.0})


@pytest.fixture(scope="session")
def sphere_grid(unit_sphere):
    """The reference sphere grid: n1=20, n2=10, standard scheme."""
    return quad_grid(unit_sphere, 20, 10, "standard")


@pytest.fixture(scope="session")
def sphere_solution_L7(sphere_grid, wave_x):
    """L=7 single-center solve on the reference grid (reused widely)."""
    basis = BasisSet(L=7, centers=np.zeros((1, 3)))
    return minimize_functional(sphere_grid, basis, wave_x)


@pytest.fixture(scope="session")
def origin_center():
    return np.zeros((1, 3))
