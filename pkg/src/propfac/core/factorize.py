"""Factorizations Psi o F = P_Gamma o phi^(p).

Psi is searched as a polynomial map of ascending total degree. Its
coefficients enter the identity linearly, so each degree is one least-squares
problem assembled by evaluation at sampled domain points; a candidate is only
accepted after the symbolic residual of Psi o F - target is checked.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .chevalley import InvariantBasis, basic_invariants
from .config import SolverConfig
from .errors import ArgumentError, NoPreimageError
from .polyalg import (Monomial, PolyMap, Polynomial, compose, monomial_values,
                      monomials_up_to, poly_equal_random)
from .propermap import (Pseudoellipsoid, multiplicity_estimate, phi_map,
                        preimages, sample_generic_point, singular_locus)
from .unigroup import FiniteUnitaryGroup, inert_coordinates, reflection_subgroup, restrict

logger = logging.getLogger(__name__)

FOUND = 'found'
NOT_FOUND = 'not-found-within-cap'

_RAY_STEPS = (0.5, 0.9, 0.99, 0.999)


@dataclass
class FactorizationReport:
    status: str
    psi: Optional[PolyMap]
    residual: float
    degree: Optional[int]
    degree_cap_used: int
    target: PolyMap
    multiplicities: Dict = field(default_factory=dict)
    seed: int = 0

    @property
    def found(self) -> bool:
        return self.status == FOUND

    def to_dict(self) -> Dict:
        return {
            'status': self.status,
            'degree': self.degree,
            'degree_cap_used': self.degree_cap_used,
            'residual': self.residual,
            'psi': self.psi.to_dict() if self.psi is not None else None,
            'psi_text': self.psi.to_string('w') if self.psi is not None else None,
            'target': self.target.to_dict(),
            'target_text': self.target.to_string(),
            'multiplicities': self.multiplicities,
            'seed': self.seed,
        }


def _embed(poly: Polynomial, coords: List[int], n: int) -> Polynomial:
    """Rename variable i of ``poly`` to ambient coordinate coords[i]."""
    terms = {}
    for m, c in poly.terms.items():
        exps = [0] * n
        for i, e in enumerate(m):
            exps[coords[i]] = e
        terms[Monomial(exps)] = c
    return Polynomial(n, terms)


def invariant_map(G: FiniteUnitaryGroup,
                  config: SolverConfig = SolverConfig()) -> Tuple[PolyMap, Optional[InvariantBasis]]:
    """P_Gamma for the reflection subgroup of G.

    Coordinates the reflection subgroup leaves inert keep their coordinate
    function. The remaining slots, in increasing order, receive the basic
    invariants of the restricted group, highest degree first.
    """
    n = G.dimension
    ref = reflection_subgroup(G)
    inert = set(inert_coordinates(ref))
    moved = [j for j in range(n) if j not in inert]
    if not moved:
        return PolyMap.identity(n), None

    basis = basic_invariants(restrict(ref, moved), config.degree_cap,
                             config.tolerances.rank, config.workers)
    ordered = sorted(range(len(basis.generators)), key=lambda i: -basis.degrees[i])
    components: List[Polynomial] = [Polynomial.variable(n, j) for j in range(n)]
    for slot, i in zip(moved, ordered):
        components[slot] = _embed(basis.generators[i], moved, n)
    return PolyMap(components), basis


def target_map(G: FiniteUnitaryGroup, E: Pseudoellipsoid,
               config: SolverConfig = SolverConfig()) -> PolyMap:
    """P_Gamma o phi^(p)."""
    if G.dimension != E.n:
        raise ArgumentError(f"group dimension {G.dimension} != pseudoellipsoid dimension {E.n}")
    P, _ = invariant_map(G, config)
    return compose(P, phi_map(E.n, E.p))


def _snap_coefficients(values: np.ndarray, grid: float) -> np.ndarray:
    """Zero real and imaginary parts below ``grid`` and round the rest to a multiple of it.

    ``grid`` is taken as a power of ten, so exact small rationals such as 1
    or 0.5 come back exactly.
    """
    digits = int(round(-np.log10(grid)))
    parts = []
    for part in (values.real, values.imag):
        part = np.where(np.abs(part) < grid, 0.0, part)
        parts.append(np.round(part, digits))
    return parts[0] + 1j * parts[1]


def _max_scaled_gap(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Per-row max over components of |lhs - rhs| / (1 + |rhs|)."""
    return (np.abs(lhs - rhs) / (1 + np.abs(rhs))).max(axis=1)


def _check_shapes(F: PolyMap, E: Pseudoellipsoid):
    if not F.is_square():
        raise ArgumentError(f"F must be square, got {F.coarity}x{F.arity}")
    if F.arity != E.n:
        raise ArgumentError(f"F has {F.arity} variables, pseudoellipsoid has dimension {E.n}")


def _in_image(F: PolyMap, E: Pseudoellipsoid, config: SolverConfig):
    """Membership test for F(E): some preimage under F lies in the closed domain."""
    def accept(y: np.ndarray) -> bool:
        try:
            roots = preimages(F, y, config, np.random.default_rng(config.seed))
        except NoPreimageError:
            return False
        return any(E.rho(x) <= config.tolerances.domain for x in roots)
    return accept


def multiplicity_ledger(psi: PolyMap, F: PolyMap, target: PolyMap, E: Pseudoellipsoid,
                        trials: int, config: SolverConfig = SolverConfig()) -> Dict:
    """m_F, m_Psi and m_target, and whether m_F * m_Psi = m_target.

    m_Psi counts only preimages of Psi inside F(E).
    """
    det_f = singular_locus(F)
    m_f = multiplicity_estimate(F, trials, config, domain=E)
    m_psi = multiplicity_estimate(
        psi, trials, config,
        sampler=lambda rng: F(sample_generic_point(F, E, rng, config, det_f)),
        accept=_in_image(F, E, config))
    m_target = multiplicity_estimate(target, trials, config, domain=E)
    return {
        'm_F': m_f.multiplicity,
        'm_psi': m_psi.multiplicity,
        'm_target': m_target.multiplicity,
        'product_holds': m_f.multiplicity * m_psi.multiplicity == m_target.multiplicity,
        'consistent': m_f.consistent and m_psi.consistent and m_target.consistent,
        'histograms': {
            'F': m_f.to_dict()['histogram'],
            'psi': m_psi.to_dict()['histogram'],
            'target': m_target.to_dict()['histogram'],
        },
    }


def solve_psi(F: PolyMap, G: FiniteUnitaryGroup, E: Pseudoellipsoid,
              degree_cap: Optional[int] = None, config: SolverConfig = SolverConfig(),
              ledger_trials: Optional[int] = None) -> FactorizationReport:
    """Lowest-degree polynomial Psi with Psi o F = P_Gamma o phi^(p).

    ``not-found-within-cap`` is inconclusive: the factor is guaranteed to be
    proper holomorphic, not polynomial.
    """
    _check_shapes(F, E)
    cap = degree_cap if degree_cap is not None else config.psi_degree_cap
    if cap < 1:
        raise ArgumentError("degree_cap must be at least 1")
    tol = config.tolerances
    target = target_map(G, E, config)
    n = E.n
    rng = np.random.default_rng(config.seed)

    for d in range(1, cap + 1):
        monos = monomials_up_to(n, d)
        exps = np.array(monos, dtype=int)
        points = E.sample_interior(rng, 2 * len(monos))
        design = monomial_values(F.evaluate_batch(points), exps)
        rhs = target.evaluate_batch(points)
        coeffs, _, rank, _ = np.linalg.lstsq(design, rhs, rcond=tol.rank)
        coeffs = _snap_coefficients(coeffs, tol.coefficient)

        check = E.sample_interior(rng, config.identity_samples)
        predicted = monomial_values(F.evaluate_batch(check), exps) @ coeffs
        gap = float(_max_scaled_gap(predicted, target.evaluate_batch(check)).max())
        logger.debug("degree %d: %d unknown(s) per component, rank %d, sampled gap %.3g",
                     d, len(monos), rank, gap)
        if gap > tol.identity:
            continue

        psi = PolyMap([Polynomial(n, {m: coeffs[j, i] for j, m in enumerate(monos)})
                       for i in range(target.coarity)])
        composite = compose(psi, F)
        residual = composite.max_coefficient_distance(target)
        identity_ok = all(poly_equal_random(c, t, config.identity_samples, tol.identity, config.seed)
                          for c, t in zip(composite, target))
        if residual > tol.identity or not identity_ok:
            logger.debug("degree %d: symbolic residual %.3g rejected", d, residual)
            continue

        trials = config.trials if ledger_trials is None else ledger_trials
        ledger = multiplicity_ledger(psi, F, target, E, trials, config) if trials > 0 else {}
        return FactorizationReport(FOUND, psi, residual, d, cap, target, ledger, config.seed)

    return FactorizationReport(NOT_FOUND, None, float('nan'), None, cap, target, {}, config.seed)


def verify_factorization(psi: PolyMap, F: PolyMap, G: FiniteUnitaryGroup, E: Pseudoellipsoid,
                         trials: int, config: SolverConfig = SolverConfig()) -> Dict:
    """Identity test, multiplicity ledger and radial properness witness for a given Psi."""
    _check_shapes(F, E)
    target = target_map(G, E, config)
    if psi.arity != F.coarity or psi.coarity != target.coarity:
        raise ArgumentError(f"psi is {psi.coarity}x{psi.arity}, expected "
                            f"{target.coarity}x{F.coarity}")
    if trials < 1:
        raise ArgumentError("trials must be at least 1")
    tol = config.tolerances
    rng = np.random.default_rng(config.seed)

    points = E.sample_interior(rng, trials)
    gaps = _max_scaled_gap(psi.evaluate_batch(F.evaluate_batch(points)),
                           target.evaluate_batch(points))
    failing = np.nonzero(gaps > tol.identity)[0]
    identity = {
        'passed': not len(failing),
        'max_residual': float(gaps.max()),
        'first_failure': int(failing[0]) if len(failing) else None,
        'samples': trials,
    }

    ledger = multiplicity_ledger(psi, F, target, E, config.trials, config)

    phi = phi_map(E.n, E.p)
    rays = []
    for b in E.sample_boundary(rng, 4):
        xs = np.array([t * b for t in _RAY_STEPS])
        rays.append({
            't': list(_RAY_STEPS),
            'phi_norms': np.linalg.norm(phi.evaluate_batch(xs), axis=1).tolist(),
            'target_norms': np.linalg.norm(target.evaluate_batch(xs), axis=1).tolist(),
            'psi_f_norms': np.linalg.norm(psi.evaluate_batch(F.evaluate_batch(xs)), axis=1).tolist(),
        })
    sphere_gap = max(abs(1 - ray['phi_norms'][-1]) for ray in rays)

    return {
        'identity': identity,
        'multiplicities': ledger,
        'properness': {
            'rays': rays,
            'phi_sphere_gap': sphere_gap,
        },
        'passed': bool(identity['passed'] and ledger['product_holds']),
        'seed': config.seed,
    }
