import numpy as np
import pytest

from propfac.core.errors import ArgumentError, SchemaError
from propfac.core.polyalg import (Monomial, PolyMap, Polynomial, compose, evaluate,
                                  identity_residual, jacobian_det, monomial_values,
                                  monomials_of_degree, monomials_up_to, poly_equal_random)
from propfac.core.propermap import phi_map
from propfac.core.unigroup import permutation_matrix

from .helpers import random_map, random_polynomial, variables


class TestMonomials:
    def test_degree_and_order(self):
        assert Monomial([2, 0, 1]).degree == 3
        assert Monomial([2, 0]).grlex_key() > Monomial([1, 1]).grlex_key()
        assert Monomial([0, 3]).grlex_key() > Monomial([2, 0]).grlex_key()

    def test_monomials_of_degree_descending(self):
        assert monomials_of_degree(2, 2) == ((2, 0), (1, 1), (0, 2))

    def test_monomials_up_to_includes_constant(self):
        assert monomials_up_to(2, 1) == ((1, 0), (0, 1), (0, 0))

    @pytest.mark.parametrize("n,d,count", [
        (1, 5, 1),
        (2, 3, 4),
        (3, 2, 6),
        (4, 3, 20),
    ])
    def test_counts(self, n, d, count):
        assert len(monomials_of_degree(n, d)) == count


class TestPolynomial:
    def test_binomial_expansion(self):
        z1, z2 = variables(2)
        assert (z1 + z2) ** 2 == z1 ** 2 + 2 * z1 * z2 + z2 ** 2

    def test_cancellation_gives_zero(self):
        z1, z2 = variables(2)
        p = (z1 + z2) - z2 - z1
        assert p.is_zero()
        assert p.degree == -1

    def test_tiny_coefficients_are_pruned(self):
        p = Polynomial(2, {(1, 0): 1, (0, 1): 1e-14})
        assert list(p.terms) == [(1, 0)]

    def test_leading_term_is_graded_lex(self):
        z1, z2 = variables(2)
        mono, coeff = (3 * z1 * z2 + 2 * z2 ** 3).leading_term()
        assert mono == (0, 3)
        assert coeff == 2

    def test_monic(self):
        z1, z2 = variables(2)
        assert (2 * z1 + 4 * z2).monic() == z1 + 2 * z2

    def test_derivative(self):
        z1, z2 = variables(2)
        assert (z1 ** 3 * z2).derivative(0) == 3 * z1 ** 2 * z2
        assert (z1 ** 3).derivative(1).is_zero()

    def test_homogeneity(self):
        z1, z2 = variables(2)
        assert (z1 * z2 + z2 ** 2).homogeneous_component(2) == z1 * z2 + z2 ** 2
        assert (z1 + z2 ** 2).homogeneous_component(2) == z2 ** 2

    def test_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            Polynomial.variable(2, 0) + Polynomial.variable(3, 0)

    def test_negative_power(self):
        with pytest.raises(ArgumentError):
            Polynomial.variable(2, 0) ** -1

    def test_to_string(self):
        z1, z2 = variables(2)
        assert (z1 * z2 - z2 ** 2 + 3).to_string() == "z1*z2 - z2^2 + 3"

    def test_from_dict(self):
        data = {'dim': 2, 'terms': [{'exp': [1, 1], 're': 1.0, 'im': 0.0},
                                    {'exp': [0, 0], 're': 0.0, 'im': 2.0}]}
        z1, z2 = variables(2)
        assert Polynomial.from_dict(data) == z1 * z2 + 2j

    @pytest.mark.parametrize("data", [
        {'terms': []},
        {'dim': 2, 'terms': [{'exp': [1, 0, 0], 're': 1.0}]},
        {'dim': 2, 'terms': [{'re': 1.0}]},
        {'dim': 'two'},
    ])
    def test_from_dict_rejects_malformed(self, data):
        with pytest.raises(SchemaError):
            Polynomial.from_dict(data)


class TestEvaluate:
    @pytest.mark.parametrize("exps,point,expected", [
        ([1, 1], [2, 3], 6),
        ([0, 0, 0, 2], [0, 0, 0, 1 + 1j], 2j),
    ])
    def test_monomial(self, exps, point, expected):
        assert evaluate(Polynomial.monomial(exps), point) == pytest.approx(expected)

    def test_cancellation(self):
        z1, z2 = variables(2)
        assert abs(evaluate(z1 + z2, [1j, -1j])) == 0

    def test_wrong_length(self):
        with pytest.raises(ArgumentError):
            evaluate(Polynomial.variable(2, 0), [1, 2, 3])

    def test_batch_matches_pointwise(self, rng):
        z1, z2, z3 = variables(3)
        p = z1 ** 3 * z2 - 2j * z3 + z2 * z3 ** 2 + 1
        points = rng.normal(size=(10, 3)) + 1j * rng.normal(size=(10, 3))
        batch = p.evaluate_batch(points)
        assert np.allclose(batch, [evaluate(p, z) for z in points])

    def test_monomial_values(self):
        points = np.array([[2, 3], [1j, 1]])
        exps = np.array([[1, 1], [0, 2], [0, 0]])
        assert np.allclose(monomial_values(points, exps), [[6, 9, 1], [1j, 1, 1]])


class TestCompose:
    def test_example_factorization(self, example_map, example_psi):
        z1, z2, z3, z4 = variables(4)
        expected = PolyMap([z1 * z2, z1 + z2, z3 ** 2, z4 ** 2])
        assert compose(example_psi, example_map) == expected

    def test_identity(self, example_map):
        assert compose(PolyMap.identity(4), example_map) == example_map

    def test_square_of_sum(self):
        w1, = variables(1)
        z1, z2 = variables(2)
        result = compose(PolyMap([w1 ** 2]), PolyMap([z1 + z2]))
        assert result[0] == z1 ** 2 + 2 * z1 * z2 + z2 ** 2

    def test_arity_mismatch(self, example_map):
        with pytest.raises(ArgumentError):
            compose(PolyMap.identity(3), example_map)

    def test_linear_map(self):
        z1, z2 = variables(2)
        swapped = compose(PolyMap([z1 * z2 ** 2]), PolyMap.linear(permutation_matrix([1, 0])))
        assert swapped[0] == z1 ** 2 * z2


class TestJacobianDet:
    def test_phi(self):
        z3 = Polynomial.variable(4, 2)
        z4 = Polynomial.variable(4, 3)
        det = jacobian_det(phi_map(4, [2, 2]))
        assert det.max_coefficient_distance(4 * z3 * z4) < 1e-12

    def test_identity(self):
        assert jacobian_det(PolyMap.identity(3)) == Polynomial.constant(3, 1)

    def test_two_by_two(self):
        z1, z2 = variables(2)
        assert jacobian_det(PolyMap([z1 * z2, z1 + z2])) == z2 - z1

    def test_example_map(self, example_map):
        z1, z2, z3, _ = variables(4)
        assert jacobian_det(example_map) == 2 * z3 * (z2 - z1)

    def test_non_square(self):
        z1, z2 = variables(2)
        with pytest.raises(ArgumentError):
            jacobian_det(PolyMap([z1 * z2]))


class TestPolyEqualRandom:
    def test_equal(self):
        z1, z2 = variables(2)
        assert poly_equal_random((z1 + z2) ** 2, z1 ** 2 + 2 * z1 * z2 + z2 ** 2, trials=20)

    def test_different(self):
        z1, z2 = variables(2)
        assert not poly_equal_random(z1, z2, trials=20)

    def test_swap_invariant_product(self):
        z1, z2 = variables(2)
        p1 = z1 * z2
        swapped = compose(PolyMap([p1]), PolyMap.linear(permutation_matrix([1, 0])))[0]
        assert poly_equal_random(swapped, p1, trials=20)

    def test_residual_is_seeded(self):
        z1, z2 = variables(2)
        assert identity_residual(z1, z2, 10, seed=3) == identity_residual(z1, z2, 10, seed=3)


class TestPolyMap:
    def test_shape(self, example_map):
        assert example_map.arity == 4
        assert example_map.coarity == 4
        assert example_map.degrees == [2, 1, 2, 1]
        assert example_map.bezout_number() == 4

    def test_mixed_dimensions(self):
        with pytest.raises(ArgumentError):
            PolyMap([Polynomial.variable(2, 0), Polynomial.variable(3, 0)])

    def test_jacobian_batch(self, example_map, rng):
        points = rng.normal(size=(3, 4)) + 0j
        jac = example_map.jacobian_batch(points)
        assert jac.shape == (3, 4, 4)
        z = points[0]
        assert np.allclose(jac[0][0], [z[1], z[0], 0, 0])
        assert np.allclose(jac[0][2], [0, 0, 2 * z[2], 0])

    def test_to_string(self, example_psi):
        assert example_psi.to_string('w') == "(w1, w2, w3, w4^2)"

    def test_from_dict_requires_components(self):
        with pytest.raises(SchemaError):
            PolyMap.from_dict({'polys': []})


class TestCompositionProperties:
    def test_associative(self, rng):
        f, g, h = (random_map(rng, 3, 2) for _ in range(3))
        lhs = compose(h, compose(g, f))
        rhs = compose(compose(h, g), f)
        for a, b in zip(lhs, rhs):
            assert a.max_coefficient_distance(b) <= 1e-10 * (1 + b.max_coefficient())

    def test_agrees_with_pointwise_evaluation(self, rng):
        f, g = random_map(rng, 3, 3), random_map(rng, 3, 2)
        gf = compose(g, f)
        for _ in range(5):
            z = 0.5 * (rng.normal(size=3) + 1j * rng.normal(size=3))
            inner = [evaluate(c, z) for c in f]
            for lhs, component in zip(gf, g):
                expected = evaluate(component, inner)
                assert abs(evaluate(lhs, z) - expected) <= 1e-9 * (1 + abs(expected))

    def test_jacobian_chain_rule(self, rng):
        f, g = random_map(rng, 2, 2), random_map(rng, 2, 3)
        lhs = jacobian_det(compose(g, f))
        rhs = compose(PolyMap([jacobian_det(g)]), f)[0] * jacobian_det(f)
        assert poly_equal_random(lhs, rhs, trials=30, tol=1e-8)

    def test_canonical_is_idempotent(self, rng):
        p = random_polynomial(rng, 2, 2) + Polynomial(2, {(3, 0): 1e-4})
        once = p.canonical(1e-3)
        assert once.coefficient((3, 0)) == 0
        assert once.canonical(1e-3) == once
