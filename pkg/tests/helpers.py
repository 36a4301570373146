import numpy as np

from propfac.core.polyalg import PolyMap, Polynomial, monomials_of_degree, monomials_up_to


def variables(n):
    return [Polynomial.variable(n, i) for i in range(n)]


def random_polynomial(rng, n, degree, homogeneous=False):
    """Complex Gaussian coefficients on every monomial of degree <= ``degree``."""
    monos = monomials_of_degree(n, degree) if homogeneous else monomials_up_to(n, degree)
    coeffs = rng.normal(size=len(monos)) + 1j * rng.normal(size=len(monos))
    return Polynomial(n, dict(zip(monos, coeffs)))


def random_map(rng, n, degree):
    return PolyMap([random_polynomial(rng, n, degree) for _ in range(n)])
