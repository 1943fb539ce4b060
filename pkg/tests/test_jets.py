"""Jet arithmetic against closed forms and the finite-difference oracle."""

import math

import numpy as np
import pytest

from genverify import exprlang, jets
from genverify.jets import Jet1, Jet2, JetDomainError, fd_oracle, seed


class TestSeed:
    def test_basic(self):
        j = seed(0, 3.0, 2)
        assert j.value == 3.0
        np.testing.assert_array_equal(j.grad, [1.0, 0.0])
        np.testing.assert_array_equal(j.hess, np.zeros((2, 2)))

    def test_second_coordinate(self):
        j = seed(1, -1.5, 2)
        assert j.value == -1.5
        np.testing.assert_array_equal(j.grad, [0.0, 1.0])

    def test_one_dimensional(self):
        j = seed(0, 0.0, 1)
        assert j.value == 0.0
        np.testing.assert_array_equal(j.grad, [1.0])
        np.testing.assert_array_equal(j.hess, [[0.0]])

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            seed(2, 1.0, 2)
        with pytest.raises(IndexError):
            seed(-1, 1.0, 2)


class TestArithmetic:
    def test_square(self):
        x = seed(0, 2.0, 1)
        j = x * x
        assert j.value == 4.0
        np.testing.assert_allclose(j.grad, [4.0])
        np.testing.assert_allclose(j.hess, [[2.0]])

    def test_exp_is_own_derivative(self):
        j = jets.exp(seed(0, 1.0, 1))
        e = math.e
        np.testing.assert_allclose([j.value, j.grad[0], j.hess[0, 0]], [e, e, e])

    def test_division_by_zero(self):
        with pytest.raises(JetDomainError):
            seed(0, 1.0, 1) / jets.const(0.0, 1)

    def test_log_sqrt_domains(self):
        with pytest.raises(JetDomainError):
            jets.log(jets.const(-1.0, 1))
        with pytest.raises(JetDomainError):
            jets.sqrt(jets.const(0.0, 1))

    def test_quotient_closed_form(self):
        # f = x/(1+x^2): f'(1) = 0, f''(1) = -1/2
        x = seed(0, 1.0, 1)
        j = x / (1.0 + x * x)
        np.testing.assert_allclose(j.value, 0.5, atol=1e-14)
        np.testing.assert_allclose(j.grad, [0.0], atol=1e-14)
        np.testing.assert_allclose(j.hess, [[-0.5]], atol=1e-14)

    def test_mixed_partials(self):
        # f = x1 * x2^2 at (3, 2)
        x1, x2 = seed(0, 3.0, 2), seed(1, 2.0, 2)
        j = x1 * x2 * x2
        assert j.value == 12.0
        np.testing.assert_allclose(j.grad, [4.0, 12.0])
        np.testing.assert_allclose(j.hess, [[0.0, 4.0], [4.0, 6.0]])

    def test_pow_const_integer_any_base(self):
        j = jets.pow_const(seed(0, -1.5, 1), 3)
        np.testing.assert_allclose(j.value, -3.375)
        np.testing.assert_allclose(j.grad, [3 * 1.5**2])
        np.testing.assert_allclose(j.hess, [[6 * -1.5]])

    def test_pow_const_fractional_needs_positive(self):
        with pytest.raises(JetDomainError):
            jets.pow_const(seed(0, -1.0, 1), 0.5)

    def test_pow_at_zero(self):
        j = jets.pow_const(seed(0, 0.0, 1), 2)
        np.testing.assert_allclose([j.value, j.grad[0], j.hess[0, 0]], [0.0, 0.0, 2.0])

    def test_exact_on_quadratics(self):
        # degree <= 2 polynomials are reproduced to roundoff
        rng = np.random.default_rng(7)
        for _ in range(20):
            a, b, c, d, e, f = rng.uniform(-2, 2, size=6)
            x0, y0 = rng.uniform(-2, 2, size=2)
            x, y = seed(0, x0, 2), seed(1, y0, 2)
            j = a + b * x + c * y + d * x * x + e * x * y + f * y * y
            assert abs(j.value - (a + b * x0 + c * y0 + d * x0**2 + e * x0 * y0 + f * y0**2)) <= 1e-12
            np.testing.assert_allclose(
                j.grad, [b + 2 * d * x0 + e * y0, c + e * x0 + 2 * f * y0], atol=1e-12
            )
            np.testing.assert_allclose(
                j.hess, [[2 * d, e], [e, 2 * f]], atol=1e-12
            )

    def test_hessian_symmetry(self):
        x1, x2 = seed(0, 0.7, 2), seed(1, -0.3, 2)
        j = jets.exp(x1 * x2) * jets.sin(x1) / (2.0 + jets.cos(x2))
        np.testing.assert_array_equal(j.hess, j.hess.T)


class TestJet1:
    def test_product_rule(self):
        a = Jet1(2.0, np.array([1.0, 0.0]))
        b = Jet1(3.0, np.array([0.0, 1.0]))
        p = a * b
        assert p.value == 6.0
        np.testing.assert_allclose(p.grad, [3.0, 2.0])

    def test_quotient_and_sqrt(self):
        a = Jet1(4.0, np.array([1.0]))
        r = a.sqrt()
        np.testing.assert_allclose([r.value, r.grad[0]], [2.0, 0.25])
        q = 1.0 / a
        np.testing.assert_allclose([q.value, q.grad[0]], [0.25, -1 / 16])

    def test_matches_jet2_truncation(self):
        x1, x2 = seed(0, 0.4, 2), seed(1, 1.3, 2)
        full = jets.exp(x1) * x2 + x1 / x2
        j1s = jets.to_j1(np.array([[full]], dtype=object))[0, 0]
        assert j1s.value == full.value
        np.testing.assert_array_equal(j1s.grad, full.grad)


class TestFdOracle:
    def test_polynomial_gradient(self):
        grad, hess = fd_oracle(lambda x: x[0] ** 2, np.array([2.0]), 1e-4)
        assert abs(grad[0] - 4.0) <= 1e-7
        assert abs(hess[0, 0] - 2.0) <= 1e-5

    def test_against_jet_evaluation(self):
        # f = exp(x1) * x2 at (0, 1): grad (1, 1)
        e = exprlang.parse("exp(x1)*x2", 2)
        x = np.array([0.0, 1.0])
        grad, hess = fd_oracle(lambda p: exprlang.evaluate(e, p), x, 1e-4)
        j = exprlang.evaluate(e, jets.seed_point(x))
        np.testing.assert_allclose(grad, [1.0, 1.0], atol=1e-7)
        np.testing.assert_allclose(j.grad, grad, atol=1e-7)
        np.testing.assert_allclose(j.hess, hess, atol=1e-5)

    def test_sin_hessian_at_zero(self):
        _, hess = fd_oracle(lambda x: math.sin(x[0]), np.array([0.0]), 1e-4)
        assert abs(hess[0, 0]) <= 1e-5


# expression corpus for the substrate acceptance property
_EXPRS_2D = [
    "exp(x1)*x2",
    "sin(x1) + cos(x2)",
    "x1^2*x2 - 3*x2^2",
    "1/(2 + sin(x1))",
    "sqrt(4 + x1^2 + x2^2)",
    "log(2 + x1*x2)",
    "exp(0.3*x1 - 0.2*x2) * cos(x1*x2)",
    "(x1 + x2)^3",
    "x1/(1 + x2^2)",
    "cos(x1)^2 * sin(x2)",
]


def test_jets_agree_with_fd_oracle_on_corpus():
    """Gradients within 1e-5 and Hessians within 1e-3 of central differences,
    over 100 random (expression, point) pairs."""
    rng = np.random.default_rng(1234)
    parsed = [exprlang.parse(s, 2) for s in _EXPRS_2D]
    for trial in range(100):
        e = parsed[trial % len(parsed)]
        x = rng.uniform(-1.0, 1.0, size=2)
        j = exprlang.evaluate(e, jets.seed_point(x))
        grad, hess = fd_oracle(lambda p: exprlang.evaluate(e, p), x, 1e-4)
        np.testing.assert_allclose(j.grad, grad, atol=1e-5)
        np.testing.assert_allclose(j.hess, hess, atol=1e-3)
