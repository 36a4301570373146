"""Invariants of finite reflection groups: Reynolds averaging and basic invariants."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import prod
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_SEED, Tolerances
from .errors import ArgumentError, CapExceededError, NotReflectionGroupError, SchemaError
from .polyalg import (Monomial, PolyMap, Polynomial, compose, identity_residual,
                      jacobian_det, monomials_of_degree)
from .unigroup import FiniteUnitaryGroup, UnitaryMatrix

logger = logging.getLogger(__name__)

DEFAULT_DEGREE_CAP = 12

_TOL = Tolerances()


@dataclass(frozen=True)
class InvariantBasis:
    generators: Tuple[Polynomial, ...]
    degrees: Tuple[int, ...]
    group_order: int
    reflection_count: int

    @property
    def dimension(self) -> int:
        return self.generators[0].dimension

    def as_map(self) -> PolyMap:
        return PolyMap(self.generators)

    def to_dict(self) -> Dict:
        return {
            'degrees': list(self.degrees),
            'group_order': self.group_order,
            'reflection_count': self.reflection_count,
            'generators': [g.to_dict() for g in self.generators],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "InvariantBasis":
        try:
            gens = tuple(Polynomial.from_dict(g) for g in data['generators'])
            return cls(gens, tuple(int(d) for d in data['degrees']),
                       int(data['group_order']), int(data['reflection_count']))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"malformed invariant basis: {e}") from None


def act(f: Polynomial, g: UnitaryMatrix) -> Polynomial:
    """f o g, i.e. z -> f(g z)."""
    return compose(PolyMap([f]), PolyMap.linear(g))[0]


def reynolds(G: FiniteUnitaryGroup, f: Polynomial) -> Polynomial:
    """(1/|G|) sum over g of f o g."""
    if f.dimension != G.dimension:
        raise ArgumentError(f"polynomial dimension {f.dimension} != group dimension {G.dimension}")
    total = Polynomial.zero(f.dimension)
    for g in G:
        total = total + act(f, g)
    return total.scale(1 / G.order)


def _coefficient_rows(polys: Sequence[Polynomial], columns: Dict[Monomial, int]) -> np.ndarray:
    rows = np.zeros((len(polys), len(columns)), dtype=complex)
    for i, p in enumerate(polys):
        for m, c in p.terms.items():
            rows[i, columns[m]] = c
    return rows


def _row_space(matrix: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of the row space; rank by singular values above tol * s_max."""
    if not matrix.size:
        return matrix[:0]
    _, s, vh = np.linalg.svd(matrix, full_matrices=False)
    if not len(s) or s[0] == 0:
        return vh[:0]
    rank = int((s > tol * s[0]).sum())
    return vh[:rank]


def _rref(matrix: np.ndarray, tol: float) -> Tuple[np.ndarray, List[int]]:
    """Reduced row-echelon form with partial pivoting, columns taken left to right."""
    m = np.array(matrix, dtype=complex)
    rows, cols = m.shape
    scale = np.abs(m).max() if m.size else 0.0
    threshold = tol * max(scale, 1.0)
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(m[r:, c])))
        if abs(m[p, c]) <= threshold:
            continue
        m[[r, p]] = m[[p, r]]
        m[r] /= m[r, c]
        for i in range(rows):
            if i != r and m[i, c] != 0:
                m[i] -= m[i, c] * m[r]
        pivots.append(c)
        r += 1
    m = m[:r]
    m[np.abs(m) <= threshold] = 0
    return m, pivots


def _products_of_degree(gens: Sequence[Polynomial], degrees: Sequence[int], d: int,
                        n: int) -> List[Polynomial]:
    """All products prod P_i^b_i with sum b_i d_i = d."""
    out: List[Polynomial] = []

    def walk(i: int, remaining: int, acc: Polynomial):
        if remaining == 0:
            out.append(acc)
            return
        if i == len(gens):
            return
        k = 0
        current = acc
        while degrees[i] * k <= remaining:
            walk(i + 1, remaining - degrees[i] * k, current)
            current = current * gens[i]
            k += 1

    walk(0, d, Polynomial.constant(n, 1))
    return out


def basic_invariants(G: FiniteUnitaryGroup, degree_cap: int = DEFAULT_DEGREE_CAP,
                     tol: float = _TOL.rank, workers: int = 1) -> InvariantBasis:
    """Chevalley basis of a reflection group, searched degree by degree.

    In each degree the invariant space (Reynolds images of all monomials) is
    reduced modulo products of the generators found so far; the remainder,
    in reduced row-echelon form over descending graded-lex columns, gives the
    new generators, each with leading coefficient 1.
    """
    if degree_cap < 1:
        raise ArgumentError("degree_cap must be at least 1")
    n = G.dimension
    gens: List[Polynomial] = []
    degrees: List[int] = []

    for d in range(1, degree_cap + 1):
        monos = monomials_of_degree(n, d)
        columns = {m: j for j, m in enumerate(monos)}
        candidates = [Polynomial.monomial(m) for m in monos]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                images = list(pool.map(lambda f: reynolds(G, f), candidates))
        else:
            images = [reynolds(G, f) for f in candidates]

        invariant_space = _row_space(_coefficient_rows(images, columns), tol)
        products = _products_of_degree(gens, degrees, d, n)
        product_rows = _coefficient_rows(products, columns)
        product_rank = len(_row_space(product_rows, tol))
        fresh = len(invariant_space) - product_rank
        logger.debug("degree %d: %d invariant(s), %d from products", d, len(invariant_space),
                     product_rank)
        if fresh <= 0:
            continue

        remainder = invariant_space.copy()
        if product_rank:
            reduced_products, pivots = _rref(product_rows, tol)
            for row, c in zip(reduced_products, pivots):
                remainder -= np.outer(remainder[:, c], row)
        echelon, _ = _rref(remainder, tol)
        if len(echelon) != fresh:
            logger.warning("degree %d: expected %d new generator(s), echelon form has %d",
                           d, fresh, len(echelon))
        for row in echelon[:fresh]:
            gens.append(Polynomial(n, {monos[j]: c for j, c in enumerate(row)}).monic())
            degrees.append(d)

        if len(gens) > n or (len(gens) == n and prod(degrees[:n]) != G.order):
            achieved = prod(degrees[:n])
            raise NotReflectionGroupError(
                f"group of order {G.order} is not generated by reflections: "
                f"degree product reached {achieved} with {len(gens)} generator(s)",
                achieved_product=achieved)
        if len(gens) == n:
            logger.debug("basic invariants complete: degrees %s", degrees)
            return InvariantBasis(tuple(gens), tuple(degrees), G.order, len(G.reflections()))

    raise CapExceededError(
        f"degree cap {degree_cap} reached with {len(gens)} of {n} generator(s) "
        f"(degrees {degrees})")


def verify_chevalley(B: InvariantBasis, G: FiniteUnitaryGroup, trials: int = 20,
                     tol: float = _TOL.identity, seed: int = DEFAULT_SEED) -> Dict:
    """Invariance, degree product, reflection count and Jacobian checks."""
    invariance = 0.0
    homogeneous = True
    for p, d in zip(B.generators, B.degrees):
        homogeneous &= not p.is_zero() and p.homogeneous_component(d) == p
        for g in G:
            invariance = max(invariance, identity_residual(act(p, g), p, trials, seed))

    degree_product = prod(B.degrees)
    reflections = len(G.reflections())
    excess = sum(d - 1 for d in B.degrees)

    if len(B.generators) == G.dimension:
        det = jacobian_det(B.as_map())
        rng = np.random.default_rng(seed)
        points = np.sqrt(rng.random((trials, G.dimension))) * np.exp(
            2j * np.pi * rng.random((trials, G.dimension)))
        jacobian_peak = float(np.abs(det.evaluate_batch(points)).max())
    else:
        jacobian_peak = 0.0

    report = {
        'invariance': {
            'passed': bool(invariance <= tol and homogeneous),
            'max_residual': invariance,
            'homogeneous': homogeneous,
        },
        'degree_product': {
            'passed': degree_product == G.order,
            'product': degree_product,
            'group_order': G.order,
        },
        'reflection_count': {
            'passed': excess == reflections,
            'sum_degrees_minus_one': excess,
            'reflections': reflections,
        },
        'jacobian': {
            'passed': jacobian_peak > _TOL.rank,
            'max_abs_value': jacobian_peak,
        },
    }
    report['passed'] = all(check['passed'] for check in report.values())
    return report
