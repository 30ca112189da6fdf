import math
from itertools import product

import numpy as np
import pytest

from conftest import gaussian_system, poly, random_orthogonal, system, unit_rows
from polycond.polycore import (
    HomogeneousPoly,
    compose_linear,
    dumps_system,
    enumerate_exponents,
    evaluate,
    evaluate_many,
    evaluate_system,
    gradient,
    higher_derivative,
    jacobian,
    loads_system,
    multinomial,
    weyl_inner,
    weyl_monomial_vector,
    weyl_norm,
    weyl_norm_system,
)


def random_poly(rng, n, d):
    return HomogeneousPoly(n, d, rng.standard_normal(math.comb(n + d - 1, d)))


@pytest.mark.parametrize("d, alpha, expected", [(2, (1, 1), 2), (3, (3, 0), 1), (6, (2, 2, 2), 90)])
def test_multinomial_values(d, alpha, expected):
    assert multinomial(d, alpha) == expected


def test_multinomial_is_exact_for_large_degree():
    d = 60
    alpha = (20, 20, 20)
    expected = math.factorial(60) // math.factorial(20) ** 3
    assert multinomial(d, alpha) == expected
    assert isinstance(multinomial(d, alpha), int)


@pytest.mark.parametrize("d, alpha", [(3, (1, 1)), (2, (3, -1))])
def test_multinomial_rejects_bad_exponents(d, alpha):
    with pytest.raises(ValueError):
        multinomial(d, alpha)


def test_enumerate_small_cases():
    assert enumerate_exponents(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert enumerate_exponents(1, 5) == [(5,)]
    assert len(enumerate_exponents(3, 2)) == 6


@pytest.mark.parametrize("n, d", [(2, 0), (3, 4), (4, 3), (5, 2)])
def test_enumerate_count_and_degree(n, d):
    ex = enumerate_exponents(n, d)
    assert len(ex) == math.comb(n + d - 1, d)
    assert len(set(ex)) == len(ex)
    assert all(sum(a) == d and min(a) >= 0 for a in ex)


def test_enumerate_order_is_graded_reverse_lex():
    # x^2 > xy > y^2 > xz > yz > z^2
    ex = enumerate_exponents(3, 2)
    assert ex == [(2, 0, 0), (1, 1, 0), (0, 2, 0), (1, 0, 1), (0, 1, 1), (0, 0, 2)]


def test_coefficient_count_is_checked():
    with pytest.raises(ValueError):
        HomogeneousPoly(2, 2, [1.0, 2.0])


def test_evaluate_saddle():
    p = poly(2, 2, {(2, 0): 1.0, (0, 2): -1.0})
    assert evaluate(p, [1.0, 1.0]) == 0.0
    th = 0.3
    assert evaluate(p, [math.cos(th), math.sin(th)]) == pytest.approx(math.cos(2 * th), rel=1e-14)


def test_evaluate_nan_propagates():
    p = poly(2, 1, {(1, 0): 1.0})
    assert math.isnan(evaluate(p, [math.nan, 0.0]))


@pytest.mark.parametrize("n, d", [(2, 3), (3, 4), (5, 2)])
def test_homogeneity(rng, n, d):
    p = random_poly(rng, n, d)
    x = rng.standard_normal(n)
    assert evaluate(p, 2 * x) == pytest.approx(2**d * evaluate(p, x), rel=1e-12)


def test_evaluate_matches_weyl_inner_product_form(rng):
    # p = <C, X(x)> when monomial coefficients are C_alpha sqrt(binom)
    n, d = 3, 4
    C = rng.standard_normal(math.comb(n + d - 1, d))
    w = np.array([multinomial(d, a) for a in enumerate_exponents(n, d)], dtype=float)
    p = HomogeneousPoly(n, d, C * np.sqrt(w))
    X = unit_rows(rng, 20, n)
    np.testing.assert_allclose(evaluate_many(p, X), weyl_monomial_vector(n, d, X) @ C, rtol=1e-12, atol=1e-13)


def test_evaluate_system_examples():
    P = system(poly(2, 1, {(1, 0): 1.0}), poly(2, 1, {(0, 1): 1.0}))
    np.testing.assert_array_equal(evaluate_system(P, [3.0, 4.0]), [3.0, 4.0])
    Q = system(poly(2, 2, {(2, 0): 1.0, (0, 2): -1.0}))
    np.testing.assert_array_equal(evaluate_system(Q, [1.0, 0.0]), [1.0])


def test_evaluate_system_norm_ignores_order(rng):
    P = gaussian_system(3, [2, 3, 1])
    R = system(*reversed(P.polys))
    x = rng.standard_normal(3)
    assert np.linalg.norm(evaluate_system(P, x)) == pytest.approx(np.linalg.norm(evaluate_system(R, x)), rel=1e-14)


def test_gradient_simple():
    p = poly(2, 2, {(2, 0): 1.0})
    np.testing.assert_allclose(gradient(p, [0.7, -1.3]), [1.4, 0.0])


@pytest.mark.parametrize("n, d", [(2, 1), (3, 5), (4, 8), (6, 3)])
def test_euler_identity(rng, n, d):
    p = random_poly(rng, n, d)
    x = rng.standard_normal(n)
    assert gradient(p, x) @ x == pytest.approx(d * evaluate(p, x), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("n, d", [(2, 3), (4, 6), (6, 8)])
def test_gradient_matches_finite_differences(rng, n, d):
    p = random_poly(rng, n, d)
    x = rng.standard_normal(n)
    h = 1e-6 * max(1.0, np.linalg.norm(x))
    fd = np.array([(evaluate(p, x + h * e) - evaluate(p, x - h * e)) / (2 * h) for e in np.eye(n)])
    g = gradient(p, x)
    assert np.linalg.norm(fd - g) <= 1e-6 * np.linalg.norm(g)


def test_first_derivative_example():
    P = system(poly(2, 2, {(1, 1): 1.0}))
    np.testing.assert_allclose(higher_derivative(P, [1.0, 1.0], [1.0, 0.0]), [1.0])


def test_first_derivative_is_jacobian_product(rng):
    P = gaussian_system(3, [2, 3])
    x, u = rng.standard_normal(3), rng.standard_normal(3)
    np.testing.assert_allclose(higher_derivative(P, x, u), jacobian(P, x) @ u, rtol=1e-12)


def test_higher_derivative_symmetric_and_multilinear(rng):
    P = gaussian_system(3, [3, 4])
    x, u, v, w = (rng.standard_normal(3) for _ in range(4))
    a = higher_derivative(P, x, u, v)
    np.testing.assert_allclose(a, higher_derivative(P, x, v, u), rtol=1e-12)
    np.testing.assert_allclose(
        higher_derivative(P, x, u, v, w), higher_derivative(P, x, w, u, v), rtol=1e-12
    )
    lin = higher_derivative(P, x, 2.0 * u + w, v)
    np.testing.assert_allclose(lin, 2.0 * a + higher_derivative(P, x, w, v), rtol=1e-12)


def test_third_derivative_of_quadratic_vanishes(rng):
    P = gaussian_system(3, [2])
    x, u = rng.standard_normal(3), rng.standard_normal(3)
    np.testing.assert_array_equal(higher_derivative(P, x, u, u, u), [0.0])


@pytest.mark.parametrize(
    "f_terms, g_terms, expected",
    [({(2, 0): 1.0}, {(2, 0): 1.0}, 1.0), ({(1, 1): 1.0}, {(1, 1): 1.0}, 0.5), ({(2, 0): 1.0}, {(0, 2): 1.0}, 0.0)],
)
def test_weyl_inner_examples(f_terms, g_terms, expected):
    assert weyl_inner(poly(2, 2, f_terms), poly(2, 2, g_terms)) == pytest.approx(expected)


def test_weyl_inner_rejects_mismatch():
    with pytest.raises(ValueError):
        weyl_inner(poly(2, 2, {(2, 0): 1.0}), poly(2, 3, {(3, 0): 1.0}))


def test_weyl_norm_system_examples(saddle):
    assert weyl_norm_system(saddle) == pytest.approx(math.sqrt(2))
    P = system(poly(2, 1, {(1, 0): 1.0}), poly(2, 1, {(0, 1): 1.0}))
    assert weyl_norm_system(P) == pytest.approx(math.sqrt(2))
    assert weyl_norm_system(saddle.scaled(-3.0)) == pytest.approx(3 * math.sqrt(2))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
def test_weyl_monomial_vector_unit(rng, n, d):
    X = unit_rows(rng, 500, n)
    norms = np.linalg.norm(weyl_monomial_vector(n, d, X), axis=1)
    assert np.max(np.abs(norms - 1.0)) <= 1e-12


def test_compose_identity_and_rotation(rng):
    p = random_poly(rng, 3, 3)
    np.testing.assert_allclose(compose_linear(p, np.eye(3)).coeffs, p.coeffs, atol=1e-14)
    x1sq = poly(2, 2, {(2, 0): 1.0})
    R = np.array([[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_allclose(compose_linear(x1sq, R).coeffs, poly(2, 2, {(0, 2): 1.0}).coeffs, atol=1e-14)


def test_compose_matches_pointwise(rng):
    p = random_poly(rng, 4, 3)
    U = rng.standard_normal((4, 4))
    x = rng.standard_normal(4)
    assert evaluate(compose_linear(p, U), x) == pytest.approx(evaluate(p, U @ x), rel=1e-11)


@pytest.mark.parametrize("n, d", [(2, 5), (3, 4), (4, 3), (6, 2)])
def test_weyl_orthogonal_invariance(rng, n, d):
    f, g = random_poly(rng, n, d), random_poly(rng, n, d)
    U = random_orthogonal(rng, n)
    lhs = weyl_inner(compose_linear(f, U), compose_linear(g, U))
    assert abs(lhs - weyl_inner(f, g)) <= 1e-10 * weyl_norm(f) * weyl_norm(g)


def test_serialisation_round_trip_is_bit_exact():
    P = gaussian_system(3, [2, 4, 1], index=5)
    Q = loads_system(dumps_system(P))
    assert Q.degrees == P.degrees
    for a, b in zip(P.polys, Q.polys):
        assert np.array_equal(a.coeffs, b.coeffs)


def test_system_requires_common_variables():
    with pytest.raises(ValueError):
        system(poly(2, 1, {(1, 0): 1.0}), poly(3, 1, {(1, 0, 0): 1.0}))
