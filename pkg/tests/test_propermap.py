from dataclasses import replace

import numpy as np
import pytest

from propfac.core.errors import ArgumentError, NoPreimageError, SchemaError
from propfac.core.factorize import target_map
from propfac.core.polyalg import PolyMap
from propfac.core.propermap import (CompleteFSet, Pseudoellipsoid, boundary_identity_check,
                                    complete_f_set, f_related, multiplicity_estimate, orbit_check,
                                    phi_map, preimages, sample_generic_point, singular_locus)
from propfac.core.unigroup import closure, permutation_matrix

from .helpers import variables


def _sorted_rows(points):
    return sorted(tuple(np.round(np.concatenate([np.real(p), np.imag(p)]), 8)) for p in points)


class TestPseudoellipsoid:
    @pytest.mark.parametrize("n,p", [
        (0, [2]),
        (2, []),
        (1, [2, 2]),
        (2, [1]),
    ])
    def test_rejects(self, n, p):
        with pytest.raises(ArgumentError):
            Pseudoellipsoid(n, p)

    def test_rho(self, ellipsoid22):
        assert ellipsoid22.rho([0, 0, 0, 0]) == -1
        assert ellipsoid22.rho([0.5, 0, 0, 0]) == pytest.approx(-0.75)
        assert ellipsoid22.rho([0, 0, 0.5, 0]) == pytest.approx(0.0625 - 1)
        assert ellipsoid22.contains([0.1, 0.2, 0.3, 0.4])
        assert not ellipsoid22.contains([1, 0, 0, 0])

    def test_interior_samples(self, ellipsoid22, rng):
        points = ellipsoid22.sample_interior(rng, 50)
        assert points.shape == (50, 4)
        assert (ellipsoid22.rho_batch(points) < 0).all()

    def test_boundary_samples(self, ellipsoid22, rng):
        points = ellipsoid22.sample_boundary(rng, 10)
        assert np.abs(ellipsoid22.rho_batch(points)).max() < 1e-12

    def test_from_dict(self):
        E = Pseudoellipsoid.from_dict({'n': 3, 'p': [3]})
        assert E.free == 2
        assert E.to_dict() == {'n': 3, 'p': [3]}

    @pytest.mark.parametrize("data", [{'n': 4}, {'n': 2, 'p': [1]}, {'p': [2]}])
    def test_from_dict_schema(self, data):
        with pytest.raises(SchemaError):
            Pseudoellipsoid.from_dict(data)


class TestPhiMap:
    def test_example(self):
        z1, z2, z3, z4 = variables(4)
        assert phi_map(4, [2, 2]) == PolyMap([z1, z2, z3 ** 2, z4 ** 2])

    def test_one_dimension(self):
        z1, = variables(1)
        assert phi_map(1, [2]) == PolyMap([z1 ** 2])

    def test_single_exponent(self):
        z1, z2, z3 = variables(3)
        assert phi_map(3, [3]) == PolyMap([z1, z2, z3 ** 3])

    @pytest.mark.parametrize("n,p", [(1, [2]), (4, [2, 2]), (3, [3, 2])])
    def test_boundary_identity(self, n, p):
        assert boundary_identity_check(Pseudoellipsoid(n, p), 10_000) <= 1e-12

    def test_boundary_maps_to_sphere(self, ellipsoid22, rng):
        phi = phi_map(4, [2, 2])
        points = ellipsoid22.sample_boundary(rng, 5)
        assert np.allclose(np.linalg.norm(phi.evaluate_batch(points), axis=1), 1)

    def test_origin(self):
        assert np.linalg.norm(phi_map(4, [2, 2])([0, 0, 0, 0])) == 0


class TestSingularLocus:
    def test_phi(self):
        _, _, z3, z4 = variables(4)
        assert singular_locus(phi_map(4, [2, 2])) == 4 * z3 * z4

    def test_example(self, example_map):
        z1, z2, z3, _ = variables(4)
        assert singular_locus(example_map) == 2 * z3 * (z2 - z1)

    def test_identity(self):
        assert singular_locus(PolyMap.identity(3)).to_string() == "1"

    def test_related_points(self, example_map):
        assert f_related(example_map, [0.1, 0.2, 0.3, 0.4], [0.2, 0.1, -0.3, 0.4])
        assert not f_related(example_map, [0.1, 0.2, 0.3, 0.4], [0.1, 0.2, 0.3, -0.4])


class TestPreimages:
    def test_phi(self, config):
        roots = preimages(phi_map(4, [2, 2]), [0.1, 0.2, 0.09, 0.04], config)
        assert len(roots) == 4
        assert _sorted_rows(roots) == _sorted_rows(
            [[0.1, 0.2, s3 * 0.3, s4 * 0.2] for s3 in (1, -1) for s4 in (1, -1)])

    def test_square(self, config):
        z1, = variables(1)
        roots = preimages(PolyMap([z1 ** 2]), [1], config)
        assert _sorted_rows(roots) == _sorted_rows([[1], [-1]])

    def test_example_map(self, example_map, config):
        w = example_map([0.3, -0.2j, 0.25, 0.1 + 0.1j])
        roots = preimages(example_map, w, config)
        assert len(roots) == 4
        assert np.abs(example_map.evaluate_batch(np.array(roots)) - w).max() < 1e-8

    def test_wrong_target_length(self, example_map):
        with pytest.raises(ArgumentError):
            preimages(example_map, [1, 2])

    def test_no_root(self, config):
        z1, z2 = variables(2)
        # z1 z2 = 1 and z1 z2 = 0 have no common solution
        with pytest.raises(NoPreimageError):
            preimages(PolyMap([z1 * z2, z1 * z2 + 1]), [1, 1], replace(config, starts=32))


class TestCompleteFSet:
    def test_example(self, example_map, ellipsoid22, config, rng):
        x = sample_generic_point(example_map, ellipsoid22, rng, config)
        fset = complete_f_set(example_map, example_map(x), ellipsoid22, config, rng)
        assert fset.good
        assert len(fset.source_points) == 4
        assert fset.max_residual < 1e-8
        assert len(fset.distinct_images(1e-6)) == 2

    def test_generic_point_avoids_branch_locus(self, example_map, ellipsoid22, config, rng):
        x = sample_generic_point(example_map, ellipsoid22, rng, config)
        assert ellipsoid22.contains(x)
        assert ellipsoid22.branch_product(x[None, :])[0] > 1e-6
        assert abs(singular_locus(example_map)(x)) > 1e-6


@pytest.mark.timeout(60)
class TestMultiplicity:
    def test_phi(self, ellipsoid22, config):
        estimate = multiplicity_estimate(phi_map(4, [2, 2]), 20, config, domain=ellipsoid22)
        assert estimate.multiplicity == 4
        assert estimate.histogram == {4: 20}

    def test_example_map(self, example_map, ellipsoid22, config):
        estimate = multiplicity_estimate(example_map, 20, config, domain=ellipsoid22)
        assert int(estimate) == 4
        assert estimate.consistent

    def test_target(self, swap4, ellipsoid22, config):
        estimate = multiplicity_estimate(target_map(swap4, ellipsoid22, config), 20, config,
                                         domain=ellipsoid22)
        assert estimate.multiplicity == 8
        assert estimate.consistent

    def test_seeded(self, example_map, ellipsoid22, config):
        first = multiplicity_estimate(example_map, 5, config, domain=ellipsoid22)
        second = multiplicity_estimate(example_map, 5, config, domain=ellipsoid22)
        assert first.to_dict() == second.to_dict()

    def test_under_resolving_solver_is_flagged(self, example_map, ellipsoid22, config, mocker):
        sizes = iter([4, 2, 4, 2])
        mocker.patch('propfac.core.propermap.preimages',
                     side_effect=lambda *args, **kwargs: [np.full(4, 0.01 * k)
                                                          for k in range(1, next(sizes) + 1)])
        estimate = multiplicity_estimate(example_map, 4, config, domain=ellipsoid22)
        assert estimate.multiplicity == 4
        assert not estimate.consistent
        assert estimate.histogram == {2: 2, 4: 2}

    def test_trials_must_be_positive(self, example_map, config):
        with pytest.raises(ArgumentError):
            multiplicity_estimate(example_map, 0, config)


@pytest.mark.timeout(120)
class TestOrbitCheck:
    @pytest.mark.slow
    def test_example_hundred_trials(self, example_map, swap4, ellipsoid22, config):
        report = orbit_check(example_map, swap4, ellipsoid22, 100, config)
        assert report['failed'] == 0
        assert report['inconclusive'] <= 5
        assert report['passed'] + report['inconclusive'] == 100
        assert report['orbit_sizes'] == {'2': 100}

    def test_example(self, example_map, swap4, ellipsoid22, config):
        report = orbit_check(example_map, swap4, ellipsoid22, 10, config)
        assert report['failed'] == 0
        assert report['max_fibre_residual'] < 1e-8

    def test_phi_with_trivial_group(self, ellipsoid22, config):
        report = orbit_check(phi_map(4, [2, 2]), closure([], dimension=4), ellipsoid22, 10, config)
        assert report['passed'] == 10
        assert report['orbit_sizes'] == {'1': 10}

    def test_target_map(self, swap4, ellipsoid22, config):
        F = target_map(swap4, ellipsoid22, config)
        report = orbit_check(F, swap4, ellipsoid22, 5, config)
        assert report['failed'] == 0
        assert report['orbit_sizes'] == {'2': 5}

    def test_wrong_group_fails(self, example_map, ellipsoid22, config):
        report = orbit_check(example_map, closure([], dimension=4), ellipsoid22, 5, config)
        assert report['failed'] == 5
        assert len(report['failures']) == 5

    def test_growing_fibre_is_retried_then_inconclusive(self, example_map, swap4, ellipsoid22,
                                                        config, mocker):
        sizes = iter(range(1, 100))

        def growing(F, w, E, config, rng):
            return CompleteFSet(target=w, source_points=[np.zeros(4)] * next(sizes), image_points=[])

        mocker.patch('propfac.core.propermap.complete_f_set', side_effect=growing)
        report = orbit_check(example_map, swap4, ellipsoid22, 3, config)
        assert report['inconclusive'] == 3
        assert report['failed'] == 0
        assert report['retried'] == 3 * config.retries

    def test_too_large_group_fails(self, swap4, ellipsoid22, config):
        F = target_map(swap4, ellipsoid22, config)
        larger = closure([permutation_matrix([1, 0, 2, 3]), -np.eye(4)])
        assert larger.order == 4
        report = orbit_check(F, larger, ellipsoid22, 5, replace(config, retries=2))
        assert report['failed'] == 5
        assert report['passed'] == 0
        assert report['failures'][0]['reason'] == 'orbit larger than the resolved fibre'
        assert report['failures'][0]['fibre_size'] == 8

    def test_too_large_group_without_retries_is_inconclusive(self, swap4, ellipsoid22, config):
        F = target_map(swap4, ellipsoid22, config)
        larger = closure([permutation_matrix([1, 0, 2, 3]), -np.eye(4)])
        report = orbit_check(F, larger, ellipsoid22, 5, replace(config, retries=0))
        assert report['inconclusive'] == 5
        assert report['failed'] == 0

    def test_is_seeded(self, example_map, swap4, ellipsoid22, config):
        first = orbit_check(example_map, swap4, ellipsoid22, 5, config)
        second = orbit_check(example_map, swap4, ellipsoid22, 5, config)
        assert first == second
