"""Sparse multivariate polynomials with complex coefficients, and polynomial maps.

Polynomials are immutable; every operation returns a new value in canonical
form (coefficients below the zero tolerance dropped). Monomials are ordered
graded-lexicographically: higher total degree first, then by the exponent of
z1, z2, ... in turn.
"""
import logging
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import DEFAULT_SEED, Tolerances
from .errors import ArgumentError, SchemaError

logger = logging.getLogger(__name__)

ZERO_TOL = Tolerances().zero

Number = Union[int, float, complex]


class Monomial(tuple):
    """Exponent vector (e1, ..., en) of z1^e1 ... zn^en."""

    __slots__ = ()

    def __new__(cls, exponents: Iterable[int]):
        exps = tuple(int(e) for e in exponents)
        if any(e < 0 for e in exps):
            raise ArgumentError(f"negative exponent in {exps}")
        return super().__new__(cls, exps)

    @property
    def dimension(self) -> int:
        return len(self)

    @property
    def degree(self) -> int:
        return sum(self)

    def grlex_key(self) -> Tuple[int, Tuple[int, ...]]:
        return (self.degree, tuple(self))

    def times(self, other: "Monomial") -> "Monomial":
        return Monomial(a + b for a, b in zip(self, other))

    @classmethod
    def unit(cls, n: int, i: int) -> "Monomial":
        return cls(1 if j == i else 0 for j in range(n))

    @classmethod
    def one(cls, n: int) -> "Monomial":
        return cls((0,) * n)


@lru_cache(maxsize=None)
def monomials_of_degree(n: int, d: int) -> Tuple[Monomial, ...]:
    """All degree-d monomials in n variables, descending graded-lex."""
    result = []
    for combo in combinations_with_replacement(range(n), d):
        exps = [0] * n
        for i in combo:
            exps[i] += 1
        result.append(Monomial(exps))
    result.sort(key=Monomial.grlex_key, reverse=True)
    return tuple(result)


def monomials_up_to(n: int, d: int) -> Tuple[Monomial, ...]:
    """All monomials of degree <= d, descending graded-lex."""
    out: List[Monomial] = []
    for k in range(d, -1, -1):
        out.extend(monomials_of_degree(n, k))
    return tuple(out)


def _format_coeff(c: complex) -> str:
    if abs(c.imag) < ZERO_TOL:
        return f"{c.real:.6g}"
    if abs(c.real) < ZERO_TOL:
        return f"{c.imag:.6g}i"
    return f"({c.real:.6g}{c.imag:+.6g}i)"


def _format_monomial(m: Monomial, var: str) -> str:
    parts = []
    for i, e in enumerate(m):
        if e == 1:
            parts.append(f"{var}{i + 1}")
        elif e > 1:
            parts.append(f"{var}{i + 1}^{e}")
    return "*".join(parts)


class Polynomial:
    __slots__ = ("_terms", "_dim")

    def __init__(self, dim: int, terms: Optional[Mapping[Iterable[int], Number]] = None,
                 tol: float = ZERO_TOL):
        if dim < 1:
            raise ArgumentError(f"polynomial dimension must be positive, got {dim}")
        clean: Dict[Monomial, complex] = {}
        for exps, coeff in (terms or {}).items():
            mono = exps if isinstance(exps, Monomial) else Monomial(exps)
            if len(mono) != dim:
                raise ArgumentError(f"monomial {tuple(mono)} does not have length {dim}")
            c = clean.get(mono, 0j) + complex(coeff)
            clean[mono] = c
        self._terms = {m: c for m, c in clean.items() if abs(c) >= tol}
        self._dim = dim

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "Polynomial":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, value: Number) -> "Polynomial":
        return cls(dim, {Monomial.one(dim): value})

    @classmethod
    def variable(cls, dim: int, i: int) -> "Polynomial":
        if not 0 <= i < dim:
            raise ArgumentError(f"variable index {i} out of range for dimension {dim}")
        return cls(dim, {Monomial.unit(dim, i): 1})

    @classmethod
    def monomial(cls, exps: Iterable[int], coeff: Number = 1) -> "Polynomial":
        mono = Monomial(exps)
        return cls(len(mono), {mono: coeff})

    @classmethod
    def linear_form(cls, coeffs: Sequence[Number]) -> "Polynomial":
        dim = len(coeffs)
        return cls(dim, {Monomial.unit(dim, j): c for j, c in enumerate(coeffs)})

    # -- accessors ------------------------------------------------------------

    @property
    def dimension(self) -> int:
        return self._dim

    @property
    def terms(self) -> Dict[Monomial, complex]:
        return dict(self._terms)

    def coefficient(self, exps: Iterable[int]) -> complex:
        return self._terms.get(Monomial(exps), 0j)

    def sorted_terms(self) -> List[Tuple[Monomial, complex]]:
        return sorted(self._terms.items(), key=lambda t: t[0].grlex_key(), reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((m.degree for m in self._terms), default=-1)

    def homogeneous_component(self, d: int) -> "Polynomial":
        return Polynomial(self._dim, {m: c for m, c in self._terms.items() if m.degree == d})

    def leading_term(self) -> Tuple[Monomial, complex]:
        if not self._terms:
            raise ArgumentError("the zero polynomial has no leading term")
        return self.sorted_terms()[0]

    def monic(self) -> "Polynomial":
        _, lc = self.leading_term()
        return self.scale(1 / lc)

    def max_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def max_coefficient_distance(self, other: "Polynomial") -> float:
        self._check_dim(other)
        keys = set(self._terms) | set(other._terms)
        return max((abs(self._terms.get(k, 0j) - other._terms.get(k, 0j)) for k in keys),
                   default=0.0)

    def canonical(self, tol: float = ZERO_TOL) -> "Polynomial":
        return Polynomial(self._dim, self._terms, tol=tol)

    def equals(self, other: "Polynomial", tol: float = ZERO_TOL) -> bool:
        return self._dim == other._dim and self.max_coefficient_distance(other) <= tol

    # -- arithmetic -----------------------------------------------------------

    def _check_dim(self, other: "Polynomial"):
        if self._dim != other._dim:
            raise ArgumentError(f"dimension mismatch: {self._dim} vs {other._dim}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check_dim(other)
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return Polynomial.constant(self._dim, complex(other))
        return NotImplemented

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, 0j) + c
        return Polynomial(self._dim, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self._dim, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def scale(self, factor: Number) -> "Polynomial":
        factor = complex(factor)
        return Polynomial(self._dim, {m: c * factor for m, c in self._terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: Dict[Monomial, complex] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                key = m1.times(m2)
                terms[key] = terms.get(key, 0j) + c1 * c2
        return Polynomial(self._dim, terms)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "Polynomial":
        return self.scale(1 / complex(other))

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ArgumentError("negative powers are not polynomials")
        result = Polynomial.constant(self._dim, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def derivative(self, j: int) -> "Polynomial":
        """Partial derivative with respect to z_{j+1}."""
        terms = {}
        for m, c in self._terms.items():
            e = m[j]
            if e:
                exps = list(m)
                exps[j] = e - 1
                terms[Monomial(exps)] = c * e
        return Polynomial(self._dim, terms)

    # -- evaluation -----------------------------------------------------------

    def __call__(self, z: Sequence[Number]) -> complex:
        return evaluate(self, z)

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """Values at each row of an (S, n) array."""
        return _CompiledPolynomial(self)(points)

    # -- dunder ---------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.equals(other)

    # equality is tolerance based, so no hash
    __hash__ = None

    def __repr__(self) -> str:
        return f"Polynomial(dim={self._dim}, {self.to_string()!r})"

    def __str__(self) -> str:
        return self.to_string()

    def to_string(self, var: str = "z") -> str:
        if not self._terms:
            return "0"
        pieces = []
        for m, c in self.sorted_terms():
            mono = _format_monomial(m, var)
            if not mono:
                pieces.append(_format_coeff(c))
            elif abs(c - 1) < ZERO_TOL:
                pieces.append(mono)
            elif abs(c + 1) < ZERO_TOL:
                pieces.append(f"-{mono}")
            else:
                pieces.append(f"{_format_coeff(c)}*{mono}")
        return " + ".join(pieces).replace("+ -", "- ")

    def to_dict(self) -> Dict:
        return {
            'dim': self._dim,
            'terms': [{'exp': list(m), 're': c.real, 'im': c.imag} for m, c in self.sorted_terms()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Polynomial":
        try:
            dim = int(data['dim'])
            raw_terms = data.get('terms', [])
            terms: Dict[Monomial, complex] = {}
            for entry in raw_terms:
                mono = Monomial(entry['exp'])
                coeff = complex(float(entry.get('re', 0.0)), float(entry.get('im', 0.0)))
                terms[mono] = terms.get(mono, 0j) + coeff
        except (KeyError, TypeError, ValueError, ArgumentError) as e:
            raise SchemaError(f"malformed polynomial: {e}") from None
        if dim < 1 or any(len(m) != dim for m in terms):
            raise SchemaError(f"polynomial terms do not match dimension {dim}")
        return cls(dim, terms)


class _CompiledPolynomial:
    """Exponent matrix and coefficient vector for vectorised evaluation."""

    def __init__(self, poly: Polynomial):
        items = poly.sorted_terms()
        self.dim = poly.dimension
        if items:
            self.exps = np.array([m for m, _ in items], dtype=int).reshape(len(items), self.dim)
            self.coeffs = np.array([c for _, c in items], dtype=complex)
        else:
            self.exps = np.zeros((0, self.dim), dtype=int)
            self.coeffs = np.zeros(0, dtype=complex)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=complex)
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise ArgumentError(f"expected points of shape (S, {self.dim}), got {points.shape}")
        if not len(self.coeffs):
            return np.zeros(points.shape[0], dtype=complex)
        return monomial_values(points, self.exps) @ self.coeffs


def monomial_values(points: np.ndarray, exps: np.ndarray) -> np.ndarray:
    """(S, T) array of z^alpha for each point row and exponent row."""
    top = int(exps.max()) if exps.size else 0
    powers = np.ones((top + 1,) + points.shape, dtype=complex)
    for k in range(1, top + 1):
        powers[k] = powers[k - 1] * points
    values = np.ones((points.shape[0], exps.shape[0]), dtype=complex)
    for j in range(points.shape[1]):
        values *= powers[exps[:, j], :, j].T
    return values


def evaluate(f: Polynomial, z: Sequence[Number]) -> complex:
    """Sum of c_alpha z^alpha by direct summation."""
    z = [complex(v) for v in z]
    if len(z) != f.dimension:
        raise ArgumentError(f"point has length {len(z)}, polynomial dimension is {f.dimension}")
    total = 0j
    for m, c in f.sorted_terms():
        term = c
        for zi, e in zip(z, m):
            if e:
                term *= zi ** e
        total += term
    return total


def _unit_polydisk(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    radius = np.sqrt(rng.random((count, n)))
    angle = rng.random((count, n)) * 2 * np.pi
    return radius * np.exp(1j * angle)


def identity_residuals(f: Polynomial, g: Polynomial, trials: int,
                       seed: int = DEFAULT_SEED) -> np.ndarray:
    """Per-sample |f(z) - g(z)| / (1 + |f(z)|) over the unit polydisk."""
    if f.dimension != g.dimension:
        raise ArgumentError(f"dimension mismatch: {f.dimension} vs {g.dimension}")
    if trials < 1:
        raise ArgumentError("trials must be at least 1")
    points = _unit_polydisk(np.random.default_rng(seed), trials, f.dimension)
    fv = f.evaluate_batch(points)
    gv = g.evaluate_batch(points)
    return np.abs(fv - gv) / (1 + np.abs(fv))


def identity_residual(f: Polynomial, g: Polynomial, trials: int,
                      seed: int = DEFAULT_SEED) -> float:
    return float(identity_residuals(f, g, trials, seed).max())


def poly_equal_random(f: Polynomial, g: Polynomial, trials: int = 20,
                      tol: float = Tolerances().identity, seed: int = DEFAULT_SEED) -> bool:
    """Randomised identity test.

    False positives are possible (a nonzero difference vanishing at every
    sample), false negatives are not, up to tolerance.
    """
    return bool(np.all(identity_residuals(f, g, trials, seed) <= tol))


class PolyMap:
    """An ordered tuple of polynomials in the same n variables."""

    __slots__ = ("_components", "_arity", "_compiled", "_jacobian_rows")

    def __init__(self, components: Sequence[Polynomial]):
        components = tuple(components)
        if not components:
            raise ArgumentError("a polynomial map needs at least one component")
        arity = components[0].dimension
        if any(c.dimension != arity for c in components):
            raise ArgumentError("all components of a polynomial map must share one dimension")
        self._components = components
        self._arity = arity
        self._compiled = None
        self._jacobian_rows = None

    @classmethod
    def identity(cls, n: int) -> "PolyMap":
        return cls([Polynomial.variable(n, i) for i in range(n)])

    @classmethod
    def linear(cls, matrix: np.ndarray) -> "PolyMap":
        """The map z -> M z."""
        matrix = np.asarray(matrix, dtype=complex)
        return cls([Polynomial.linear_form(row) for row in matrix])

    @property
    def components(self) -> Tuple[Polynomial, ...]:
        return self._components

    @property
    def arity(self) -> int:
        return self._arity

    @property
    def coarity(self) -> int:
        return len(self._components)

    def is_square(self) -> bool:
        return self._arity == self.coarity

    def __len__(self) -> int:
        return self.coarity

    def __iter__(self) -> Iterator[Polynomial]:
        return iter(self._components)

    def __getitem__(self, i: int) -> Polynomial:
        return self._components[i]

    @property
    def degrees(self) -> List[int]:
        return [c.degree for c in self._components]

    def bezout_number(self) -> int:
        total = 1
        for d in self.degrees:
            total *= max(d, 1)
        return total

    def __call__(self, z: Sequence[Number]) -> np.ndarray:
        return np.array([evaluate(c, z) for c in self._components], dtype=complex)

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """(S, m) array of the map at each row of an (S, n) array."""
        if self._compiled is None:
            self._compiled = [_CompiledPolynomial(c) for c in self._components]
        points = np.atleast_2d(np.asarray(points, dtype=complex))
        return np.stack([c(points) for c in self._compiled], axis=1)

    def jacobian(self) -> List[List[Polynomial]]:
        return [[c.derivative(j) for j in range(self._arity)] for c in self._components]

    def jacobian_batch(self, points: np.ndarray) -> np.ndarray:
        """(S, m, n) array of Jacobian matrices at each row of points."""
        if self._jacobian_rows is None:
            self._jacobian_rows = [PolyMap(row) for row in self.jacobian()]
        return np.stack([r.evaluate_batch(points) for r in self._jacobian_rows], axis=1)

    def equals(self, other: "PolyMap", tol: float = ZERO_TOL) -> bool:
        return (self.arity == other.arity and self.coarity == other.coarity
                and all(a.equals(b, tol) for a, b in zip(self, other)))

    def max_coefficient_distance(self, other: "PolyMap") -> float:
        if self.coarity != other.coarity:
            raise ArgumentError(f"coarity mismatch: {self.coarity} vs {other.coarity}")
        return max(a.max_coefficient_distance(b) for a, b in zip(self, other))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMap):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def __repr__(self) -> str:
        return f"PolyMap({self.to_string()})"

    def to_string(self, var: str = "z") -> str:
        return "(" + ", ".join(c.to_string(var) for c in self._components) + ")"

    def to_dict(self) -> Dict:
        return {'components': [c.to_dict() for c in self._components]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "PolyMap":
        if not isinstance(data, Mapping) or not isinstance(data.get('components'), list):
            raise SchemaError("a polynomial map needs a 'components' list")
        try:
            return cls([Polynomial.from_dict(c) for c in data['components']])
        except ArgumentError as e:
            if isinstance(e, SchemaError):
                raise
            raise SchemaError(str(e)) from None


def compose(g: PolyMap, f: PolyMap) -> PolyMap:
    """The map z -> g(f(z)), expanded symbolically."""
    if g.arity != f.coarity:
        raise ArgumentError(f"cannot compose: g takes {g.arity} inputs, f returns {f.coarity}")
    n = f.arity
    powers: Dict[Tuple[int, int], Polynomial] = {}

    def power(i: int, e: int) -> Polynomial:
        key = (i, e)
        if key not in powers:
            if e == 0:
                powers[key] = Polynomial.constant(n, 1)
            elif e == 1:
                powers[key] = f[i]
            else:
                powers[key] = power(i, e - 1) * f[i]
        return powers[key]

    components = []
    for gc in g:
        acc: Dict[Monomial, complex] = {}
        for m, c in gc.terms.items():
            term = Polynomial.constant(n, c)
            for i, e in enumerate(m):
                if e:
                    term = term * power(i, e)
            for tm, tc in term.terms.items():
                acc[tm] = acc.get(tm, 0j) + tc
        components.append(Polynomial(n, acc))
    return PolyMap(components)


def _det(matrix: List[List[Polynomial]], n: int) -> Polynomial:
    """Laplace expansion along rows, memoised on the remaining column set."""
    memo: Dict[Tuple[int, ...], Polynomial] = {}

    def minor(row: int, cols: Tuple[int, ...]) -> Polynomial:
        if not cols:
            return Polynomial.constant(n, 1)
        if cols in memo:
            return memo[cols]
        total = Polynomial.zero(n)
        for pos, col in enumerate(cols):
            entry = matrix[row][col]
            if entry.is_zero():
                continue
            rest = cols[:pos] + cols[pos + 1:]
            term = entry * minor(row + 1, rest)
            total = total - term if pos % 2 else total + term
        memo[cols] = total
        return total

    return minor(0, tuple(range(len(matrix))))


def jacobian_det(F: PolyMap) -> Polynomial:
    """det (dF_i / dz_j), expanded."""
    if not F.is_square():
        raise ArgumentError(f"Jacobian determinant needs a square map, got {F.coarity}x{F.arity}")
    return _det(F.jacobian(), F.arity)
