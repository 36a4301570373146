import numpy as np
import pytest

from propfac.core.config import SolverConfig
from propfac.core.polyalg import PolyMap
from propfac.core.propermap import Pseudoellipsoid
from propfac.core.unigroup import closure, diagonal_matrix, permutation_matrix, root_of_unity

from .helpers import variables


@pytest.fixture
def swap2():
    return closure([permutation_matrix([1, 0])])


@pytest.fixture
def swap4():
    """Gamma = {Id, (z1, z2, z3, z4) -> (z2, z1, z3, z4)}."""
    return closure([permutation_matrix([1, 0, 2, 3])])


@pytest.fixture
def signed_permutations():
    return closure([permutation_matrix([1, 0]), diagonal_matrix([-1, 1])])


@pytest.fixture
def cyclic():
    def build(p):
        return closure([diagonal_matrix([1, root_of_unity(p)])])
    return build


@pytest.fixture
def ellipsoid22():
    return Pseudoellipsoid(4, [2, 2])


@pytest.fixture
def example_map():
    """F = (z1 z2, z1 + z2, z3^2, z4)."""
    z1, z2, z3, z4 = variables(4)
    return PolyMap([z1 * z2, z1 + z2, z3 ** 2, z4])


@pytest.fixture
def example_psi():
    w1, w2, w3, w4 = variables(4)
    return PolyMap([w1, w2, w3, w4 ** 2])


@pytest.fixture
def config():
    return SolverConfig(trials=20)


@pytest.fixture
def rng():
    return np.random.default_rng(7)
