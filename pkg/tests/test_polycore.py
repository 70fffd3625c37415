"""
Tests for polynomial and rational-sum arithmetic.
"""

import math

import numpy as np

from critlab.conf import override_config
from critlab.ensembles import bit_reversed_circle, roots_of_unity
from critlab.exceptions import PoleHit, SizeMismatch
from critlab.polycore import (
    Polynomial,
    RationalSum,
    RootSet,
    derivative,
    eval_rational,
    evaluate,
    log_abs_prod,
    log_abs_sums,
    numerator_polynomial,
    pairwise_sum,
    poly_from_roots,
    rational_sums,
)
from critlab.rootfind import aberth_roots

from .base import CritLabTestCase


class TestPolynomial(CritLabTestCase):
    """Test cases for the dense polynomial type."""

    def test_trailing_zero_coefficients_are_trimmed(self):
        """Test that trailing zero coefficients do not count towards the degree."""
        p = Polynomial([1, 2, 0, 0])

        self.assertEqual(p.degree, 1)
        self.assertEqual(p.leading, 2)

    def test_zero_polynomial(self):
        """Test that the zero polynomial has degree 0 and reports itself as zero."""
        p = Polynomial([0, 0, 0])

        self.assertTrue(p.is_zero)
        self.assertEqual(p.degree, 0)

    def test_coefficients_are_read_only(self):
        """Test that the coefficient array cannot be written."""
        p = Polynomial([1, 1])

        with self.assertRaises(ValueError):
            p.coeffs[0] = 5

    def test_call_evaluates(self):
        """Test that calling a polynomial evaluates it."""
        self.assertEqual(Polynomial([-1, 0, 1])(2), 3)


class TestConstruction(CritLabTestCase):
    """Test cases for poly_from_roots and derivative."""

    def test_two_roots(self):
        """Test that the roots 1 and -1 expand to z^2 - 1."""
        p = poly_from_roots(RootSet([1, -1]))

        np.testing.assert_allclose(p.coeffs, [-1, 0, 1])

    def test_empty_product_is_one(self):
        """Test that no roots give the constant 1."""
        p = poly_from_roots(RootSet([]))

        self.assertEqual(p.degree, 0)
        np.testing.assert_allclose(p.coeffs, [1])

    def test_fourth_roots_of_unity(self):
        """Test that the fourth roots of unity expand to z^4 - 1."""
        p = poly_from_roots(roots_of_unity(4))

        np.testing.assert_allclose(p.coeffs, [-1, 0, 0, 0, 1], atol=1e-14)

    def test_compensated_expansion_agrees(self):
        """Test that the double-double expansion agrees with the plain one."""
        roots = RootSet(self.random_disk_points(12, seed=3))

        plain = poly_from_roots(roots, compensated=False)
        compensated = poly_from_roots(roots, compensated=True)

        np.testing.assert_allclose(compensated.coeffs, plain.coeffs, rtol=1e-9, atol=1e-11)

    def test_compensation_threshold_comes_from_settings(self):
        """Test that the compensation threshold is read from the settings."""
        roots = roots_of_unity(8)

        with override_config(COMPENSATED_DEGREE=4):
            p = poly_from_roots(roots)

        np.testing.assert_allclose(p.coeffs, [-1, 0, 0, 0, 0, 0, 0, 0, 1], atol=1e-14)

    def test_derivative_power_rule(self):
        """Test that the derivative of z^4 - 1 is 4z^3."""
        p = derivative(Polynomial([-1, 0, 0, 0, 1]))

        np.testing.assert_allclose(p.coeffs, [0, 0, 0, 4])

    def test_derivative_of_constant_is_zero(self):
        """Test that the derivative of a constant is zero."""
        self.assertTrue(derivative(Polynomial([7])).is_zero)

    def test_derivative_of_geometric_sum(self):
        """Test that (z - 1)^2 Q'(z) = 5z^6 - 6z^5 + 1 for Q = 1 + z + ... + z^5."""
        q_prime = derivative(Polynomial(np.ones(6)))

        product = np.polynomial.polynomial.polymul([1, -2, 1], q_prime.coeffs)

        np.testing.assert_allclose(product, [1, 0, 0, 0, 0, -6, 5], atol=1e-14)

    def test_roots_survive_expansion(self):
        """Test that the root finder recovers the atoms of an expanded product."""
        for n in (8, 100, 256):
            with self.subTest(n=n):
                roots = bit_reversed_circle(n)

                self.assertMatched(aberth_roots(poly_from_roots(roots)).roots, roots, 1e-8)


class TestEvaluation(CritLabTestCase):
    """Test cases for compensated Horner evaluation and log products."""

    def test_value(self):
        """Test that evaluation returns the value and a condition number of at least 1."""
        result = evaluate(Polynomial([-1, 0, 1]), 2)

        self.assertEqual(result.value, 3)
        self.assertGreaterEqual(result.condition, 1.0)

    def test_value_at_root(self):
        """Test that the value at a root is 0 with infinite condition number."""
        result = evaluate(Polynomial([-1, 0, 0, 0, 1]), 1j)

        self.assertEqual(result.value, 0)
        self.assertEqual(result.condition, math.inf)

    def test_degree_100_at_origin_matches_direct_product(self):
        """Test that the value at 0 of a degree-100 expansion matches the product of the roots."""
        roots = bit_reversed_circle(100)
        p = poly_from_roots(roots)

        expected = np.prod(-roots.atoms)
        result = evaluate(p, 0)

        self.assertLess(abs(result.value - expected), 1e-10)

    def test_error_bound_is_nonnegative(self):
        """Test that the error bound is never negative."""
        p = poly_from_roots(RootSet(self.random_disk_points(30, seed=1)))

        self.assertGreaterEqual(evaluate(p, 0.3 + 0.2j).error_bound, 0.0)

    def test_log_abs_prod(self):
        """Test that log_abs_prod is log|z| for a root at 0 and -inf on a root."""
        self.assertAlmostEqual(log_abs_prod(RootSet([0]), math.e), 1.0, places=15)
        self.assertEqual(log_abs_prod(RootSet([1, -1]), 1), -math.inf)

    def test_log_abs_prod_agrees_with_evaluation(self):
        """Test that log_abs_prod equals the log modulus of the expanded polynomial."""
        roots = RootSet(self.random_disk_points(30, seed=4))
        p = poly_from_roots(roots)

        for z in (0.3 + 0.2j, -0.7j, 1.5):
            with self.subTest(z=z):
                expected = math.log(abs(evaluate(p, z).value))
                self.assertAlmostEqual(log_abs_prod(roots, z), expected, places=9)

    def test_log_abs_prod_avoids_overflow(self):
        """Test that log_abs_prod stays finite where the product would overflow."""
        value = log_abs_prod(roots_of_unity(512), 2)

        self.assertAlmostEqual(value, 512 * math.log(2), places=9)

    def test_log_abs_sums_matches_direct_sum(self):
        """Test that chunked log sums match the direct sums."""
        atoms = self.random_disk_points(20, seed=4)
        points = np.array([2.0, 1j, -0.5 + 0.5j])

        with override_config(CHUNK_ENTRIES=7):
            values = log_abs_sums(atoms, points)

        expected = [np.sum(np.log(np.abs(z - atoms))) for z in points]
        np.testing.assert_allclose(values, expected, rtol=1e-13)

    def test_pairwise_sum(self):
        """Test that pairwise summation handles long and empty inputs."""
        self.assertEqual(pairwise_sum(np.ones(1000)), 1000)
        self.assertEqual(pairwise_sum(np.array([])), 0)


class TestRationalSum(CritLabTestCase):
    """Test cases for L(z) = sum a_k/(z - z_k)."""

    def test_size_mismatch(self):
        """Test that weights and poles of different lengths raise SizeMismatch."""
        with self.assertRaises(SizeMismatch):
            RationalSum([1, 1], [0])

    def test_distinct_poles_flag(self):
        """Test that repeated poles clear the distinct_poles flag."""
        self.assertTrue(RationalSum([1, 1], [0, 1]).distinct_poles)
        self.assertFalse(RationalSum([1, 1], [1, 1]).distinct_poles)

    def test_logarithmic_derivative_has_unit_weights(self):
        """Test that the logarithmic derivative has one unit weight per root."""
        L = RationalSum.logarithmic_derivative(RootSet([1, 2, 3]))

        np.testing.assert_allclose(L.weights, 1)
        self.assertEqual(L.total_weight, 3)

    def test_eval_rational(self):
        """Test that eval_rational sums a_k / (z - z_k)."""
        L = RationalSum([1, 1], [1, -1])

        self.assertAlmostEqual(eval_rational(L, 2).s1, 4 / 3, places=15)
        self.assertEqual(eval_rational(L, 0).s1, 0)

    def test_second_sum(self):
        """Test that eval_rational also returns the sum of a_k / (z - z_k)^2."""
        L = RationalSum([1, 1], [0, 1])

        result = eval_rational(L, 2)

        self.assertAlmostEqual(result.s1, 1.5)
        self.assertAlmostEqual(result.s2, 1.25)

    def test_pole_hit(self):
        """Test that evaluating on a pole raises PoleHit."""
        with self.assertRaises(PoleHit):
            eval_rational(RationalSum([1, 1], [0, 1]), 1)

    def test_vectorized_sums_match_scalar_evaluation(self):
        """Test that the vectorized sums match scalar evaluation point by point."""
        poles = self.random_disk_points(15, seed=2)
        weights = self.rng(5).random(15) + 0.5
        points = np.array([1.5, -2j, 0.1 + 1.7j])
        L = RationalSum(weights, poles)

        s1, s2, t, magnitude = rational_sums(weights, poles, points)

        for k, z in enumerate(points):
            expected = eval_rational(L, z)
            self.assertAlmostEqual(s1[k], expected.s1, places=12)
            self.assertAlmostEqual(s2[k], expected.s2, places=12)
            self.assertAlmostEqual(t[k], np.sum(1 / (z - poles)), places=12)
            self.assertGreaterEqual(magnitude[k], abs(s1[k]))

    def test_numerator_polynomial(self):
        """Test that the numerator of 1/z + 1/(z - 1) is 2z - 1."""
        N = numerator_polynomial(RationalSum([1, 1], [0, 1]))

        np.testing.assert_allclose(N.coeffs, [-1, 2])

    def test_numerator_of_logarithmic_derivative_is_derivative(self):
        """Test that the numerator of P'/P is P'."""
        roots = RootSet(self.random_disk_points(12, seed=6))

        N = numerator_polynomial(RationalSum.logarithmic_derivative(roots))

        np.testing.assert_allclose(
            N.coeffs, derivative(poly_from_roots(roots)).coeffs, rtol=1e-9, atol=1e-10
        )
