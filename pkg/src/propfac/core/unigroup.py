"""Finite subgroups of U_n given by generators.

Group elements are stored as complex numpy arrays. Two elements are the same
when their entrywise max distance is below the group-equality tolerance;
lookups go through a rounding hash so closure stays near-linear in the order.
"""
import itertools
import logging
from collections import deque
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .config import Tolerances
from .errors import ArgumentError, NotFiniteError, SchemaError
from .utils import parse_complex, vector_pairs

logger = logging.getLogger(__name__)

UnitaryMatrix = np.ndarray

DEFAULT_ORDER_CAP = 10_000
HASH_DIGITS = 6
_SCALE = 10 ** HASH_DIGITS
_MAX_BORDERLINE = 8

_TOL = Tolerances()


def as_unitary(entries, tol: float = _TOL.unitary) -> UnitaryMatrix:
    m = np.array(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ArgumentError(f"expected a non-empty square matrix, got shape {m.shape}")
    defect = np.abs(m @ m.conj().T - np.eye(m.shape[0])).max()
    if defect >= tol:
        raise ArgumentError(f"matrix is not unitary (max |UU* - I| = {defect:.3g})")
    return m


def permutation_matrix(perm: Sequence[int]) -> UnitaryMatrix:
    """Matrix sending e_j to e_perm[j], i.e. (Mz)_perm[j] = z_j."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ArgumentError(f"{perm} is not a permutation of 0..{n - 1}")
    m = np.zeros((n, n), dtype=complex)
    for j, i in enumerate(perm):
        m[i, j] = 1
    return m


def diagonal_matrix(diagonal: Sequence[complex]) -> UnitaryMatrix:
    return as_unitary(np.diag(np.asarray(diagonal, dtype=complex)))


def root_of_unity(p: int, k: int = 1) -> complex:
    return complex(np.exp(2j * np.pi * k / p))


def _bucket_keys(m: UnitaryMatrix, tol: float) -> Iterator[Tuple[int, ...]]:
    """The rounding key of m, then the keys of neighbouring buckets that an
    element within ``tol`` of m could have landed in."""
    scaled = np.concatenate([m.real.ravel(), m.imag.ravel()]) * _SCALE
    nearest = np.rint(scaled).astype(np.int64)
    yield tuple(nearest.tolist())
    frac = scaled - np.floor(scaled)
    margin = tol * _SCALE
    borderline = np.nonzero(np.abs(frac - 0.5) <= margin)[0]
    if not len(borderline) or len(borderline) > _MAX_BORDERLINE:
        return
    options = []
    for idx in borderline:
        lo = int(np.floor(scaled[idx]))
        options.append((lo, lo + 1))
    for choice in itertools.product(*options):
        key = nearest.copy()
        key[borderline] = choice
        yield tuple(key.tolist())


class FiniteUnitaryGroup:
    """A finite group of n x n unitary matrices, identity first."""

    def __init__(self, dimension: int, tol: float = _TOL.group_equality,
                 generators: Optional[Sequence[UnitaryMatrix]] = None):
        self.dimension = dimension
        self.tol = tol
        self.generators: List[UnitaryMatrix] = list(generators or [])
        self._elements: List[UnitaryMatrix] = []
        self._buckets: Dict[Tuple[int, ...], List[int]] = {}
        self._scan_only = False
        self._add(np.eye(dimension, dtype=complex))

    @classmethod
    def trivial(cls, n: int) -> "FiniteUnitaryGroup":
        return cls(n)

    # -- membership -----------------------------------------------------------

    def _add(self, m: UnitaryMatrix) -> int:
        self._elements.append(m)
        idx = len(self._elements) - 1
        key = next(_bucket_keys(m, self.tol))
        self._buckets.setdefault(key, []).append(idx)
        return idx

    def index_of(self, m: UnitaryMatrix) -> Optional[int]:
        m = np.asarray(m, dtype=complex)
        if m.shape != (self.dimension, self.dimension):
            return None
        keys = list(_bucket_keys(m, self.tol))
        for key in keys:
            for idx in self._buckets.get(key, ()):
                if np.abs(self._elements[idx] - m).max() < self.tol:
                    return idx
        if len(keys) == 1 and self._needs_scan(m):
            # too many borderline entries to enumerate neighbour buckets
            for idx, e in enumerate(self._elements):
                if np.abs(e - m).max() < self.tol:
                    return idx
        return None

    def _needs_scan(self, m: UnitaryMatrix) -> bool:
        scaled = np.concatenate([m.real.ravel(), m.imag.ravel()]) * _SCALE
        frac = scaled - np.floor(scaled)
        return int((np.abs(frac - 0.5) <= self.tol * _SCALE).sum()) > _MAX_BORDERLINE

    def contains(self, m: UnitaryMatrix) -> bool:
        return self.index_of(m) is not None

    __contains__ = contains

    # -- views ----------------------------------------------------------------

    @property
    def elements(self) -> List[UnitaryMatrix]:
        return list(self._elements)

    @property
    def order(self) -> int:
        return len(self._elements)

    def __len__(self) -> int:
        return len(self._elements)

    def __iter__(self) -> Iterator[UnitaryMatrix]:
        return iter(self._elements)

    def __getitem__(self, i: int) -> UnitaryMatrix:
        return self._elements[i]

    def reflections(self) -> List[UnitaryMatrix]:
        return [g for g in self._elements if is_reflection(g)]

    def is_subgroup_of(self, other: "FiniteUnitaryGroup") -> bool:
        return (self.dimension == other.dimension and other.order % self.order == 0
                and all(other.contains(h) for h in self._elements))

    def element_order(self, g: UnitaryMatrix) -> int:
        power = np.asarray(g, dtype=complex)
        identity = np.eye(self.dimension)
        for k in range(1, self.order + 1):
            if np.abs(power - identity).max() < self.tol:
                return k
            power = power @ g
        raise ArgumentError("element does not have finite order within the group order")

    def is_trivial(self) -> bool:
        return self.order == 1

    def __repr__(self) -> str:
        return f"FiniteUnitaryGroup(dimension={self.dimension}, order={self.order})"

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> Dict:
        return {
            'dim': self.dimension,
            'generators': [matrix_to_json(g) for g in self.generators],
            'order': self.order,
            'reflection_count': len(self.reflections()),
        }

    @classmethod
    def from_dict(cls, data: Mapping, order_cap: int = DEFAULT_ORDER_CAP,
                  tol: float = _TOL.group_equality) -> "FiniteUnitaryGroup":
        """Close a group spec ``{"dim": n, "generators": [...]}``."""
        if not isinstance(data, Mapping) or 'dim' not in data:
            raise SchemaError("a group spec needs 'dim' and 'generators'")
        dim = data['dim']
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
            raise SchemaError(f"'dim' must be a positive integer, got {dim!r}")
        raw = data.get('generators', [])
        if not isinstance(raw, list):
            raise SchemaError("'generators' must be a list of matrices")
        gens = [matrix_from_json(g, dim) for g in raw]
        return closure(gens, order_cap=order_cap, dimension=dim, tol=tol)


def matrix_to_json(m: UnitaryMatrix) -> List[List[List[float]]]:
    return [vector_pairs(row) for row in m]


def matrix_from_json(data, dim: int) -> UnitaryMatrix:
    """Rows of ``[re, im]`` pairs; a flat list of n*n pairs is accepted too."""
    if not isinstance(data, list):
        raise SchemaError("a matrix must be a list of rows")
    if dim > 1 and len(data) == dim * dim:
        data = [data[i * dim:(i + 1) * dim] for i in range(dim)]
    if len(data) != dim or any(not isinstance(row, list) or len(row) != dim for row in data):
        raise SchemaError(f"a generator must be a {dim}x{dim} matrix")
    return as_unitary([[parse_complex(v) for v in row] for row in data])


def closure(generators: Iterable[UnitaryMatrix], order_cap: int = DEFAULT_ORDER_CAP,
            dimension: Optional[int] = None,
            tol: float = _TOL.group_equality) -> FiniteUnitaryGroup:
    """Breadth-first product closure of the generators."""
    gens = [as_unitary(g) for g in generators]
    if order_cap < 1:
        raise ArgumentError("order_cap must be at least 1")
    dims = {g.shape[0] for g in gens}
    if dimension is not None:
        dims.add(dimension)
    if len(dims) != 1:
        raise ArgumentError(f"generators have mixed or unknown dimensions: {sorted(dims)}")
    dim = dims.pop()

    group = FiniteUnitaryGroup(dim, tol=tol, generators=gens)
    queue = deque([group[0]])
    while queue:
        current = queue.popleft()
        for g in gens:
            product = g @ current
            if group.contains(product):
                continue
            group._add(product)
            if group.order > order_cap:
                raise NotFiniteError(
                    f"group is not finite within cap {order_cap} "
                    f"(non-finite or ill-conditioned generators)")
            queue.append(product)
    logger.debug("closure: %d generator(s) in dimension %d -> order %d", len(gens), dim, group.order)
    return group


def is_reflection(g: UnitaryMatrix, tol: float = _TOL.rank) -> bool:
    """True when g - I has numerical rank one (fixed set is a hyperplane)."""
    g = np.asarray(g, dtype=complex)
    singular = np.linalg.svd(g - np.eye(g.shape[0]), compute_uv=False)
    return int((singular > tol).sum()) == 1


def reflection_subgroup(G: FiniteUnitaryGroup) -> FiniteUnitaryGroup:
    """The subgroup generated by all reflections of G (trivial if none)."""
    refl = G.reflections()
    if not refl:
        return FiniteUnitaryGroup.trivial(G.dimension)
    return closure(refl, order_cap=G.order, dimension=G.dimension, tol=G.tol)


def coset_decomposition(G: FiniteUnitaryGroup, H: FiniteUnitaryGroup) -> List[UnitaryMatrix]:
    """Representatives h0 = Id, h1, ..., hk with G the disjoint union of the H h_i."""
    if not H.is_subgroup_of(G):
        raise ArgumentError("H is not a subgroup of G")
    covered = [False] * G.order
    reps: List[UnitaryMatrix] = []
    for i, g in enumerate(G):
        if covered[i]:
            continue
        reps.append(g)
        for h in H:
            j = G.index_of(h @ g)
            if j is None or covered[j]:
                raise ArgumentError("cosets do not partition G; H is not a subgroup within tolerance")
            covered[j] = True
    return reps


def is_normal(G: FiniteUnitaryGroup, H: FiniteUnitaryGroup) -> bool:
    if not H.is_subgroup_of(G):
        return False
    for g in G:
        g_inv = g.conj().T
        for r in H:
            if not H.contains(g @ r @ g_inv):
                return False
    return True


def orbit(G: FiniteUnitaryGroup, z: Sequence[complex], tol: float = _TOL.orbit) -> List[np.ndarray]:
    z = np.asarray(z, dtype=complex)
    if z.shape != (G.dimension,):
        raise ArgumentError(f"point has length {len(z)}, group dimension is {G.dimension}")
    points: List[np.ndarray] = []
    for g in G:
        y = g @ z
        if all(np.abs(y - p).max() > tol for p in points):
            points.append(y)
    return points


def inert_coordinates(G: FiniteUnitaryGroup) -> List[int]:
    """Coordinates j with g e_j = e_j and (g z)_j = z_j for every g in G."""
    inert = []
    for j in range(G.dimension):
        unit = np.zeros(G.dimension)
        unit[j] = 1
        if all(np.abs(g[:, j] - unit).max() < G.tol and np.abs(g[j, :] - unit).max() < G.tol
               for g in G):
            inert.append(j)
    return inert


def restrict(G: FiniteUnitaryGroup, coords: Sequence[int]) -> FiniteUnitaryGroup:
    """G acting on the given coordinates; faithful when the others are inert."""
    coords = list(coords)
    if not coords:
        raise ArgumentError("cannot restrict to an empty set of coordinates")
    block = np.ix_(coords, coords)
    sub = FiniteUnitaryGroup(len(coords), tol=G.tol,
                             generators=[g[block] for g in G.generators])
    for g in G:
        m = g[block]
        if not sub.contains(m):
            sub._add(m)
    return sub
