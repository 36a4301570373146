"""Pseudoellipsoids, the monomial map phi^(p), fibres and multiplicities.

Fibres are computed by multistart Newton iteration, vectorised over starts.
Generic targets are always produced as F(x) for sampled domain points x,
never drawn blind in the codomain.
"""
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from .config import SolverConfig, Tolerances
from .errors import ArgumentError, ComputationError, NoPreimageError, SchemaError
from .polyalg import PolyMap, Polynomial, jacobian_det
from .unigroup import FiniteUnitaryGroup, orbit
from .utils import spawn_rngs, vector_pairs

logger = logging.getLogger(__name__)

_MAX_SAMPLING_ROUNDS = 1000
_DIVERGED = 1e8
_TOL = Tolerances()

Sampler = Callable[[np.random.Generator], np.ndarray]


class Pseudoellipsoid:
    """sum_{j<=n-k} |z_j|^2 + sum_i |z_{n-k+i}|^(2 p_i) < 1."""

    def __init__(self, n: int, p: Sequence[int]):
        p = tuple(int(e) for e in p)
        if n < 1:
            raise ArgumentError(f"ambient dimension must be positive, got {n}")
        if not p:
            raise ArgumentError("a pseudoellipsoid needs at least one exponent")
        if len(p) > n:
            raise ArgumentError(f"{len(p)} exponents do not fit in dimension {n}")
        if any(e < 2 for e in p):
            raise ArgumentError(f"exponents must be at least 2, got {list(p)}")
        self.n = n
        self.p = p

    @property
    def k(self) -> int:
        return len(self.p)

    @property
    def free(self) -> int:
        """Number of leading coordinates with exponent 1."""
        return self.n - self.k

    def _weights(self) -> np.ndarray:
        return np.array([1] * self.free + list(self.p))

    def rho_batch(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=complex))
        return (np.abs(points) ** (2 * self._weights())).sum(axis=1) - 1

    def rho(self, z: Sequence[complex]) -> float:
        return float(self.rho_batch(np.asarray(z, dtype=complex)[None, :])[0])

    def contains(self, z: Sequence[complex]) -> bool:
        return self.rho(z) < 0

    def branch_product(self, points: np.ndarray) -> np.ndarray:
        """|z_{n-k+1} ... z_n| per row; zero exactly on pi."""
        points = np.atleast_2d(np.asarray(points, dtype=complex))
        return np.abs(points[:, self.free:].prod(axis=1))

    def sample_interior(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform rejection sampling from the unit polydisk."""
        out: List[np.ndarray] = []
        have = 0
        while have < count:
            batch = max(2 * (count - have), 16)
            radius = np.sqrt(rng.random((batch, self.n)))
            angle = 2 * np.pi * rng.random((batch, self.n))
            z = radius * np.exp(1j * angle)
            keep = z[self.rho_batch(z) < 0]
            out.append(keep)
            have += len(keep)
        return np.concatenate(out)[:count]

    def sample_boundary(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Points with rho = 0 along random complex rays from the origin."""
        direction = rng.normal(size=(count, self.n)) + 1j * rng.normal(size=(count, self.n))
        lo = np.zeros(count)
        hi = np.ones(count)
        while True:
            outside = self.rho_batch(hi[:, None] * direction) > 0
            if outside.all():
                break
            hi[~outside] *= 2
        for _ in range(80):
            mid = (lo + hi) / 2
            inside = self.rho_batch(mid[:, None] * direction) < 0
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        return ((lo + hi) / 2)[:, None] * direction

    def to_dict(self) -> Dict:
        return {'n': self.n, 'p': list(self.p)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Pseudoellipsoid":
        try:
            return cls(int(data['n']), [int(e) for e in data['p']])
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ArgumentError):
                raise SchemaError(str(e)) from None
            raise SchemaError(f"a pseudoellipsoid needs 'n' and 'p': {e}") from None

    def __repr__(self) -> str:
        return f"Pseudoellipsoid(n={self.n}, p={list(self.p)})"


@dataclass
class CompleteFSet:
    """A fibre F^-1(w) inside the domain, with its phi^(p) image."""
    target: np.ndarray
    source_points: List[np.ndarray]
    image_points: List[np.ndarray]
    good: bool = True
    max_residual: float = 0.0

    def distinct_images(self, tol: float) -> List[np.ndarray]:
        return _dedupe(self.image_points, tol)

    def to_dict(self) -> Dict:
        return {
            'target': vector_pairs(self.target),
            'good': self.good,
            'max_residual': self.max_residual,
            'source_points': [vector_pairs(x) for x in self.source_points],
            'image_points': [vector_pairs(y) for y in self.image_points],
        }


@dataclass
class MultiplicityEstimate:
    multiplicity: int
    counts: List[int]
    histogram: Dict[int, int] = field(default_factory=dict)
    consistent: bool = True
    seed: int = 0

    def __int__(self) -> int:
        return self.multiplicity

    def to_dict(self) -> Dict:
        return {
            'multiplicity': self.multiplicity,
            'consistent': self.consistent,
            'histogram': {str(k): v for k, v in sorted(self.histogram.items())},
            'counts': list(self.counts),
            'seed': self.seed,
        }


def _dedupe(points: Sequence[np.ndarray], tol: float) -> List[np.ndarray]:
    kept: List[np.ndarray] = []
    for x in points:
        if all(np.linalg.norm(x - y) > tol for y in kept):
            kept.append(x)
    return kept


def phi_map(n: int, p: Sequence[int]) -> PolyMap:
    """(z_1, ..., z_{n-k}, z_{n-k+1}^p_1, ..., z_n^p_k)."""
    E = Pseudoellipsoid(n, p)
    exps = [1] * E.free + list(E.p)
    return PolyMap([Polynomial.variable(n, j) ** e for j, e in enumerate(exps)])


def boundary_identity_check(E: Pseudoellipsoid, samples: int, seed: int = 0) -> float:
    """max | |phi(z)|^2 - rho(z) - 1 | over interior and boundary samples."""
    if samples < 1:
        raise ArgumentError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    inner = samples - samples // 2
    points = np.concatenate([E.sample_interior(rng, inner),
                             E.sample_boundary(rng, samples // 2)])
    phi = phi_map(E.n, E.p)
    norms = (np.abs(phi.evaluate_batch(points)) ** 2).sum(axis=1)
    return float(np.abs(norms - E.rho_batch(points) - 1).max())


def singular_locus(F: PolyMap) -> Polynomial:
    """det J_F; Z_F is its zero set."""
    if not F.is_square():
        raise ArgumentError(f"singular locus needs a square map, got {F.coarity}x{F.arity}")
    return jacobian_det(F)


def f_related(F: PolyMap, x: Sequence[complex], y: Sequence[complex],
              tol: float = _TOL.fibre) -> bool:
    """x and y lie in one fibre of F."""
    return bool(np.abs(F(x) - F(y)).max() <= tol)


def _ball_points(rng: np.random.Generator, count: int, n: int, radius: float) -> np.ndarray:
    direction = rng.normal(size=(count, 2 * n))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1 / (2 * n))
    real = direction * r[:, None]
    return real[:, :n] + 1j * real[:, n:]


def preimages(F: PolyMap, w: Sequence[complex], config: SolverConfig = SolverConfig(),
              rng: Optional[np.random.Generator] = None) -> List[np.ndarray]:
    """Distinct solutions of F(z) = w found by multistart Newton."""
    if not F.is_square():
        raise ArgumentError(f"preimages need a square map, got {F.coarity}x{F.arity}")
    w = np.asarray(w, dtype=complex)
    if w.shape != (F.coarity,):
        raise ArgumentError(f"target has length {len(w)}, map has {F.coarity} components")
    tol = config.tolerances
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    starts = config.newton_starts(F.bezout_number())

    z = _ball_points(rng, starts, F.arity, config.seed_radius)
    alive = np.ones(starts, dtype=bool)
    residual = np.full(starts, np.inf)
    for _ in range(config.max_newton_steps):
        values = F.evaluate_batch(z) - w
        residual = np.abs(values).max(axis=1)
        active = alive & (residual >= tol.newton_residual)
        if not active.any():
            break
        jac = F.jacobian_batch(z[active])
        singular = np.abs(np.linalg.det(jac)) < tol.zero
        idx = np.nonzero(active)[0]
        alive[idx[singular]] = False
        ok = idx[~singular]
        if len(ok):
            step = np.linalg.solve(jac[~singular], values[ok][:, :, None])[:, :, 0]
            z[ok] -= step
        alive &= np.isfinite(z).all(axis=1) & (np.abs(z).max(axis=1) < _DIVERGED)
        z[~alive] = 0
    else:
        residual = np.abs(F.evaluate_batch(z) - w).max(axis=1)

    converged = alive & (residual < tol.newton_residual)
    logger.debug("preimages: %d of %d start(s) converged, %d discarded",
                 int(converged.sum()), starts, int((~alive).sum()))
    roots = _dedupe(list(z[converged]), tol.root_dedup)
    if not roots:
        raise NoPreimageError(f"no preimage found from {starts} Newton start(s)")
    return roots


def sample_generic_point(F: PolyMap, E: Optional[Pseudoellipsoid], rng: np.random.Generator,
                         config: SolverConfig = SolverConfig(),
                         det: Optional[Polynomial] = None) -> np.ndarray:
    """A domain point away from Z_F and (when E is given) from pi."""
    det = det if det is not None else singular_locus(F)
    threshold = config.tolerances.rejection
    for _ in range(_MAX_SAMPLING_ROUNDS):
        if E is not None:
            batch = E.sample_interior(rng, 16)
            away = E.branch_product(batch) > threshold
        else:
            batch = np.sqrt(rng.random((16, F.arity))) * np.exp(
                2j * np.pi * rng.random((16, F.arity)))
            away = np.ones(len(batch), dtype=bool)
        away &= np.abs(det.evaluate_batch(batch)) > threshold
        if away.any():
            return batch[np.argmax(away)]
    raise ComputationError("could not sample a point away from the singular locus")


def complete_f_set(F: PolyMap, w: Sequence[complex], E: Pseudoellipsoid,
                   config: SolverConfig = SolverConfig(),
                   rng: Optional[np.random.Generator] = None) -> CompleteFSet:
    """The fibre of w inside the closed domain and its image under phi^(p)."""
    tol = config.tolerances
    w = np.asarray(w, dtype=complex)
    roots = preimages(F, w, config, rng)
    source = [x for x in roots if E.rho(x) <= tol.domain]
    if not source:
        return CompleteFSet(target=w, source_points=[], image_points=[], good=False)
    stacked = np.array(source)
    phi = phi_map(E.n, E.p)
    images = list(phi.evaluate_batch(stacked))
    det = np.abs(singular_locus(F).evaluate_batch(stacked))
    good = bool((det > tol.rejection).all() and (E.branch_product(stacked) > tol.rejection).all())
    residual = float(np.abs(F.evaluate_batch(stacked) - w).max())
    return CompleteFSet(target=w, source_points=source, image_points=images,
                        good=good, max_residual=residual)


def multiplicity_estimate(F: PolyMap, trials: int, config: SolverConfig = SolverConfig(),
                          domain: Optional[Pseudoellipsoid] = None,
                          sampler: Optional[Sampler] = None,
                          accept: Optional[Callable[[np.ndarray], bool]] = None) -> MultiplicityEstimate:
    """Maximal fibre size over generic targets w = F(x).

    With a domain, x is sampled in it and only preimages in its closure count.
    A sampler supplies source points for maps whose domain has no defining
    function (e.g. the image of another map); ``accept`` then decides which
    preimages lie in that domain.
    """
    if trials < 1:
        raise ArgumentError("trials must be at least 1")
    det = singular_locus(F)
    threshold = config.tolerances.rejection

    def one_trial(rng: np.random.Generator) -> int:
        if sampler is not None:
            x = sampler(rng)
            for _ in range(_MAX_SAMPLING_ROUNDS):
                if abs(det(x)) > threshold:
                    break
                x = sampler(rng)
        else:
            x = sample_generic_point(F, domain, rng, config, det)
        try:
            roots = preimages(F, F(x), config, rng)
        except NoPreimageError:
            return 0
        if domain is not None:
            roots = [r for r in roots if domain.rho(r) <= config.tolerances.domain]
        if accept is not None:
            roots = [r for r in roots if accept(r)]
        return len(roots)

    rngs = spawn_rngs(config.seed, trials)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            counts = list(pool.map(one_trial, rngs))
    else:
        counts = [one_trial(rng) for rng in rngs]

    histogram = dict(sorted(Counter(counts).items()))
    consistent = len(histogram) == 1
    if not consistent:
        logger.warning("fibre sizes vary across trials %s; consider more Newton starts", histogram)
    return MultiplicityEstimate(multiplicity=max(counts), counts=counts, histogram=histogram,
                                consistent=consistent, seed=config.seed)


def _match_sets(images: Sequence[np.ndarray], orbit_points: Sequence[np.ndarray],
                tol: float) -> str:
    """'match', 'partial' (images are a proper subset of the orbit) or 'mismatch'."""
    unused = list(orbit_points)
    for y in images:
        if not unused:
            return 'mismatch'
        dists = [np.linalg.norm(y - o) for o in unused]
        best = int(np.argmin(dists))
        if dists[best] > tol:
            return 'mismatch'
        unused.pop(best)
    return 'match' if not unused else 'partial'


def orbit_check(F: PolyMap, G: FiniteUnitaryGroup, E: Pseudoellipsoid, trials: int,
                config: SolverConfig = SolverConfig()) -> Dict:
    """Compare phi^(p)-images of fibres of F with G-orbits.

    A trial whose fibre image is a proper subset of the orbit is re-run with
    twice the Newton starts, up to ``config.retries`` times. If a re-run finds
    no new fibre point, the fibre is resolved and the orbit is too large, so
    the trial fails. A fibre that keeps growing is counted as inconclusive.
    """
    if G.dimension != E.n or F.arity != E.n:
        raise ArgumentError("map, group and pseudoellipsoid must share one dimension")
    if trials < 1:
        raise ArgumentError("trials must be at least 1")
    tol = config.tolerances
    phi = phi_map(E.n, E.p)
    det = singular_locus(F)
    base_starts = config.newton_starts(F.bezout_number())

    passed = failed = inconclusive = retried = 0
    max_residual = 0.0
    orbit_sizes: Counter = Counter()
    failures: List[Dict] = []
    for trial, rng in enumerate(spawn_rngs(config.seed, trials)):
        x = sample_generic_point(F, E, rng, config, det)
        w = F(x)
        expected = orbit(G, phi(x), tol.orbit)
        orbit_sizes[len(expected)] += 1
        outcome = 'partial'
        reason = 'fibre image outside the orbit'
        fibre_size: Optional[int] = None
        for attempt in range(config.retries + 1):
            if attempt:
                retried += 1
            attempt_config = replace(config, starts=base_starts * 2 ** attempt)
            try:
                fset = complete_f_set(F, w, E, attempt_config, rng)
            except NoPreimageError:
                continue
            max_residual = max(max_residual, fset.max_residual)
            outcome = _match_sets(fset.distinct_images(tol.orbit), expected, tol.orbit)
            if outcome != 'partial':
                break
            size = len(fset.source_points)
            if fibre_size is not None and size <= fibre_size:
                outcome = 'mismatch'
                reason = 'orbit larger than the resolved fibre'
                break
            fibre_size = size
        if outcome == 'match':
            passed += 1
        elif outcome == 'mismatch':
            failed += 1
            if len(failures) < 5:
                failures.append({'trial': trial, 'reason': reason, 'target': vector_pairs(w),
                                 'fibre_size': len(fset.source_points),
                                 'fibre_images': [vector_pairs(y) for y in fset.distinct_images(tol.orbit)],
                                 'orbit': [vector_pairs(y) for y in expected]})
        else:
            inconclusive += 1
            logger.warning("orbit check trial %d inconclusive after %d attempt(s)",
                           trial, config.retries + 1)

    return {
        'trials': trials,
        'passed': passed,
        'failed': failed,
        'inconclusive': inconclusive,
        'retried': retried,
        'max_fibre_residual': max_residual,
        'orbit_sizes': {str(k): v for k, v in sorted(orbit_sizes.items())},
        'group_order': G.order,
        'seed': config.seed,
        'failures': failures,
    }
