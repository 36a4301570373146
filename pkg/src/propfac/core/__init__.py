from .chevalley import InvariantBasis, basic_invariants, reynolds, verify_chevalley
from .config import DEFAULT_SEED, SolverConfig, Tolerances
from .factorize import FactorizationReport, solve_psi, target_map, verify_factorization
from .polyalg import Monomial, PolyMap, Polynomial, compose, jacobian_det, poly_equal_random
from .propermap import Pseudoellipsoid, multiplicity_estimate, orbit_check, phi_map, preimages
from .unigroup import FiniteUnitaryGroup, closure, coset_decomposition, reflection_subgroup
from .._version import __version__

__all__ = [
    'Monomial', 'Polynomial', 'PolyMap', 'compose', 'jacobian_det', 'poly_equal_random',
    'FiniteUnitaryGroup', 'closure', 'reflection_subgroup', 'coset_decomposition',
    'InvariantBasis', 'basic_invariants', 'reynolds', 'verify_chevalley',
    'Pseudoellipsoid', 'phi_map', 'preimages', 'multiplicity_estimate', 'orbit_check',
    'FactorizationReport', 'target_map', 'solve_psi', 'verify_factorization',
    'SolverConfig', 'Tolerances', 'DEFAULT_SEED', '__version__',
]
