"""
Tests for polynomial zeros, critical points and the structural checks.
"""

import numpy as np
import pytest

from critlab.conf import override_config
from critlab.ensembles import (
    dyadic_sequence,
    example1_roots,
    lemniscate_roots,
    roots_of_unity,
)
from critlab.exceptions import (
    DegreeTooLarge,
    DidNotConverge,
    InvalidPolynomial,
    SizeMismatch,
    TooLarge,
)
from critlab.polycore import (
    Polynomial,
    RationalSum,
    RootSet,
    derivative,
    numerator_polynomial,
    poly_from_roots,
)
from critlab.rootfind import (
    aberth_roots,
    companion_roots,
    critical_points,
    gauss_lucas_violations,
    match_rootsets,
    merge_multiple_zeros,
    rational_zeros,
    rotational_order,
    vieta_mean_gap,
)

from .base import CritLabTestCase


def double_root_polynomial(n):
    """n z^{n+1} - (n+1) z^n + 1, with a double zero at z = 1."""
    coeffs = np.zeros(n + 2, dtype=complex)
    coeffs[0] = 1
    coeffs[n] = -(n + 1)
    coeffs[n + 1] = n
    return Polynomial(coeffs)


class TestAberthRoots(CritLabTestCase):
    """Test cases for simultaneous Aberth iteration on coefficients."""

    def test_quadratic(self):
        """Test that z^2 - 1 solves to 1 and -1."""
        report = aberth_roots(Polynomial([-1, 0, 1]))

        self.assertMatched(report.roots, [1, -1], 1e-12)
        self.assertTrue(report.all_converged)

    def test_roots_of_unity(self):
        """Test that z^64 - 1 solves to the 64th roots of unity."""
        coeffs = np.zeros(65)
        coeffs[0], coeffs[64] = -1, 1

        report = aberth_roots(Polynomial(coeffs))

        self.assertEqual(len(report), 64)
        self.assertMatched(report.roots, roots_of_unity(64), 1e-10)

    def test_real_roots(self):
        """Test that real roots are recovered from the expanded product."""
        report = aberth_roots(poly_from_roots(RootSet([1, 2, 3])))

        self.assertMatched(report.roots, [1, 2, 3], 1e-10)

    def test_zero_roots_are_split_off_exactly(self):
        """Test that vanishing low coefficients give exact zero roots."""
        report = aberth_roots(Polynomial([0, 0, -1, 1]))

        atoms = np.sort_complex(report.roots.atoms)
        self.assertEqual(atoms[0], 0)
        self.assertEqual(atoms[1], 0)
        self.assertAlmostEqual(atoms[2], 1, places=14)

    def test_constant_is_rejected(self):
        """Test that a constant raises InvalidPolynomial."""
        with self.assertRaises(InvalidPolynomial):
            aberth_roots(Polynomial([3]))

    def test_double_root_polynomial_matches_companion(self):
        """Test that Aberth matches the companion oracle near a double root."""
        p = double_root_polynomial(16)

        self.assertMatched(aberth_roots(p).roots, companion_roots(p), 1e-7)

    def test_random_polynomial_matches_companion(self):
        """Test that Aberth matches the companion oracle on random zeros."""
        p = poly_from_roots(RootSet(self.random_disk_points(30, seed=11)))

        self.assertMatched(aberth_roots(p).roots, companion_roots(p), 1e-8)

    def test_repeatable(self):
        """Test that repeated solves return the same roots."""
        p = poly_from_roots(RootSet(self.random_disk_points(100, seed=12)))

        self.assertMatched(aberth_roots(p).roots, aberth_roots(p).roots, 1e-9)

    def test_iteration_budget_exhausted(self):
        """Test that running out of iterations raises DidNotConverge with the report."""
        p = poly_from_roots(RootSet(self.random_disk_points(30, seed=13)))

        with self.assertRaises(DidNotConverge) as caught:
            aberth_roots(p, max_iter=1)

        self.assertIsNotNone(caught.exception.report)
        self.assertFalse(caught.exception.report.all_converged)

    def test_lenient_mode_returns_report(self):
        """Test that lenient mode returns the unconverged report."""
        p = poly_from_roots(RootSet(self.random_disk_points(30, seed=13)))

        with override_config(STRICT_CONVERGENCE=False):
            report = aberth_roots(p, max_iter=1)

        self.assertEqual(len(report), 30)
        self.assertFalse(report.all_converged)


class TestCompanionRoots(CritLabTestCase):
    """Test cases for the companion-matrix oracle."""

    def test_quadratic(self):
        """Test that the companion oracle solves z^2 - 1."""
        self.assertMatched(companion_roots(Polynomial([-1, 0, 1])), [1, -1], 1e-14)

    def test_triple_zero(self):
        """Test that z^3 gives three exact zeros."""
        roots = companion_roots(Polynomial([0, 0, 0, 1]))

        np.testing.assert_array_equal(roots.atoms, [0, 0, 0])

    def test_degree_limit(self):
        """Test that the companion oracle refuses large degrees."""
        with self.assertRaises(DegreeTooLarge):
            companion_roots(poly_from_roots(roots_of_unity(65)))


class TestMatching(CritLabTestCase):
    """Test cases for bottleneck matching of root sets."""

    def test_identical_sets(self):
        """Test that a set matches its reversal at distance 0."""
        atoms = self.random_disk_points(50, seed=1)

        self.assertEqual(match_rootsets(RootSet(atoms), RootSet(atoms[::-1])), 0.0)

    def test_single_points(self):
        """Test that two single points match at their separation."""
        self.assertEqual(match_rootsets(RootSet([0]), RootSet([1])), 1.0)

    def test_crossing_pairs(self):
        """Test that the matching pairs each point with its nearest partner."""
        distance = match_rootsets(RootSet([0, 1]), RootSet([1.1, 0.1]))

        self.assertAlmostEqual(distance, 0.1, places=12)

    def test_bottleneck_not_greedy(self):
        """Test that the matching minimizes the largest distance, not each distance greedily."""
        # nearest-neighbour pairing would send 0 -> 0.4 and force 1.0 -> -1
        distance = match_rootsets(RootSet([0, 1.0]), RootSet([0.4, -1.0]))

        self.assertAlmostEqual(distance, 1.0, places=12)

    def test_size_mismatch(self):
        """Test that sets of different sizes raise SizeMismatch."""
        with self.assertRaises(SizeMismatch):
            match_rootsets(RootSet([0, 1]), RootSet([0]))

    def test_size_limit(self):
        """Test that oversized sets raise TooLarge."""
        with override_config(MATCH_MAX_SIZE=3):
            with self.assertRaises(TooLarge):
                match_rootsets(roots_of_unity(4), roots_of_unity(4))


class TestSymmetry(CritLabTestCase):
    """Test cases for merging repeated zeros and rotational symmetry."""

    def test_merge_multiple_zeros(self):
        """Test that nearly equal zeros merge with their multiplicity."""
        centres, counts = merge_multiple_zeros([1, 2, 1, 1 + 1e-15])

        np.testing.assert_array_equal(centres, [1, 2])
        np.testing.assert_array_equal(counts, [3, 1])

    def test_merge_keeps_distinct_atoms(self):
        """Test that distinct zeros are not merged."""
        atoms = self.random_disk_points(20, seed=2)

        centres, counts = merge_multiple_zeros(atoms)

        np.testing.assert_array_equal(centres, atoms)
        self.assertTrue(np.all(counts == 1))

    def test_rotational_order_of_roots_of_unity(self):
        """Test that the n-th roots of unity have rotational order n."""
        self.assertEqual(rotational_order(roots_of_unity(12).atoms, 0), 12)

    def test_rotational_order_of_two_circles(self):
        """Test that two rotated circles of n zeros have order n."""
        self.assertEqual(rotational_order(example1_roots([1.0, 2.0], 8).atoms, 0), 8)

    def test_rotational_order_of_random_points(self):
        """Test that random points have order 1."""
        atoms = self.random_disk_points(16, seed=3)

        self.assertEqual(rotational_order(atoms, atoms.mean()), 1)

    def test_atom_at_center_breaks_symmetry(self):
        """Test that an atom at the centre gives order 1."""
        atoms = np.concatenate([roots_of_unity(6).atoms, [0]])

        self.assertEqual(rotational_order(atoms, 0), 1)


class TestCriticalPoints(CritLabTestCase):
    """Test cases for critical points computed from root form."""

    def test_two_zeros(self):
        """Test that two zeros have their midpoint as critical point."""
        report = critical_points(RootSet([2.5, -2.5]))

        self.assertEqual(len(report), 1)
        self.assertAlmostEqual(report.roots.atoms[0], 0, places=15)

    def test_double_zero_contributes_an_exact_atom(self):
        """Test that a double zero appears exactly among the critical points."""
        report = critical_points(RootSet([1, 1, 2]))

        self.assertIn(1, report.roots.atoms.tolist())
        self.assertMatched(report.roots, [1, 5 / 3], 1e-14)

    def test_single_zero_is_rejected(self):
        """Test that a single zero raises InvalidPolynomial."""
        with self.assertRaises(InvalidPolynomial):
            critical_points(RootSet([1]))

    def test_repeated_single_point(self):
        """Test that a zero of multiplicity n gives n - 1 critical points at it."""
        report = critical_points(RootSet([0.5j] * 5))

        np.testing.assert_array_equal(report.roots.atoms, [0.5j] * 4)

    def test_roots_of_unity_collapse_to_origin(self):
        """Test that every critical point of z^n - 1 is at the origin."""
        report = critical_points(roots_of_unity(512))

        self.assertEqual(len(report), 511)
        self.assertAllNear(report.roots, 0, 1e-8)

    def test_dyadic_prefix_collapses_to_origin(self):
        """Test that a power-of-two dyadic prefix has its critical points at 0."""
        report = critical_points(dyadic_sequence(64))

        self.assertAllNear(report.roots, 0, 1e-12)

    def test_two_circles_keep_mass_at_origin(self):
        """Test that two circles of zeros put n - 1 critical points at the origin."""
        report = critical_points(example1_roots([1.0, 2.0], 16))

        self.assertEqual(len(report), 31)
        at_origin = np.abs(report.roots.atoms) < 1e-12
        self.assertEqual(int(at_origin.sum()), 15)

    def test_two_circles_at_high_degree(self):
        """Test that two circles keep n - 1 critical points at the origin at large n."""
        for n in (300, 512, 1024):
            with self.subTest(n=n):
                report = critical_points(example1_roots([1.0, 2.0], n))

                self.assertEqual(len(report), 2 * n - 1)
                self.assertTrue(report.all_converged)
                at_origin = np.abs(report.roots.atoms) < 1e-8
                self.assertEqual(int(at_origin.sum()), n - 1)

    def test_lemniscate_mass_sits_on_zeros_of_p(self):
        """Test that P^n - 1 has n - 1 critical points on each zero of P."""
        P = Polynomial([-0.09, 0, 1])
        report = critical_points(lemniscate_roots(P, 16))

        atoms = report.roots.atoms
        self.assertEqual(atoms.size, 31)
        for zero in (0.3, -0.3):
            self.assertEqual(int(np.sum(np.abs(atoms - zero) < 1e-10)), 15)

    def test_random_zeros_match_companion_oracle(self):
        """Test that root-form critical points match the companion roots of P'."""
        zeros = RootSet(self.random_disk_points(25, seed=21))

        report = critical_points(zeros)

        expected = companion_roots(derivative(poly_from_roots(zeros)))
        self.assertEqual(len(report), 24)
        self.assertMatched(report.roots, expected, 1e-7)

    def test_critical_points_are_zeros_of_the_log_derivative(self):
        """Test that P'/P vanishes at every critical point relative to its scale."""
        zeros = RootSet(self.random_disk_points(200, seed=22))

        report = critical_points(zeros)

        sums = np.array([np.sum(1 / (c - zeros.atoms)) for c in report.roots.atoms])
        scale = np.array([np.sum(1 / np.abs(c - zeros.atoms)) for c in report.roots.atoms])
        self.assertLess(float(np.max(np.abs(sums) / scale)), 1e-8)

    def test_conjugate_symmetric_input(self):
        """Test that conjugate-symmetric zeros give conjugate-symmetric critical points."""
        x = np.tan(np.pi * (self.rng(4).random(20) - 0.5))
        zeros = RootSet(np.concatenate([x + 1j, x - 1j]))

        critical = critical_points(zeros).roots

        self.assertMatched(critical, critical.conjugate(), 1e-9)


class TestRationalZeros(CritLabTestCase):
    """Test cases for zeros of weighted rational sums."""

    def test_two_poles(self):
        """Test that 1/z + 1/(z - 1) vanishes at one half."""
        report = rational_zeros(RationalSum([1, 1], [0, 1]))

        self.assertMatched(report.roots, [0.5], 1e-14)

    def test_three_poles(self):
        """Test that three unit poles on the line give zeros at plus and minus 1/sqrt(3)."""
        report = rational_zeros(RationalSum([1, 1, 1], [-1, 0, 1]))

        self.assertMatched(report.roots, [3**-0.5, -(3**-0.5)], 1e-12)

    def test_weights_summing_to_zero_drop_a_zero(self):
        """Test that weights summing to zero lower the number of zeros."""
        report = rational_zeros(RationalSum([1, -1], [0, 1]))

        self.assertEqual(len(report), 0)

    def test_weighted_poles_match_numerator_expansion(self):
        """Test that weighted zeros match the companion roots of the numerator."""
        poles = self.random_disk_points(20, seed=7)
        weights = -np.log1p(-self.rng(8).random(20))
        L = RationalSum(weights, poles)

        report = rational_zeros(L)

        expected = companion_roots(numerator_polynomial(L))
        self.assertMatched(report.roots, expected, 1e-7)

    def test_repeated_poles_are_merged(self):
        """Test that repeated poles merge into one pole of summed weight."""
        report = rational_zeros(RationalSum([1, 1, 2], [0, 0, 1]))

        self.assertMatched(report.roots, [0.5], 1e-14)


class TestStructuralChecks(CritLabTestCase):
    """Test cases for Gauss-Lucas and Vieta checks."""

    def test_random_zeros_satisfy_gauss_lucas(self):
        """Test that random zeros have every critical point inside their hull."""
        zeros = RootSet(self.random_disk_points(100, seed=31))

        critical = critical_points(zeros).roots

        self.assertEqual(gauss_lucas_violations(zeros, critical).size, 0)

    def test_point_outside_hull_is_reported(self):
        """Test that a point outside the hull is reported by index."""
        violations = gauss_lucas_violations(RootSet([0, 1, 1j]), RootSet([0.2 + 0.2j, 2]))

        np.testing.assert_array_equal(violations, [1])

    def test_collinear_zeros(self):
        """Test that a degenerate hull reports points off the segment."""
        violations = gauss_lucas_violations(RootSet([0, 1, 2]), RootSet([0.5, 3, 1 + 0.1j]))

        np.testing.assert_array_equal(violations, [1, 2])

    def test_vieta_mean_gap(self):
        """Test that zeros and critical points share their mean."""
        zeros = RootSet(self.random_disk_points(80, seed=32))

        gap = vieta_mean_gap(zeros, critical_points(zeros).roots)

        self.assertLess(gap, 1e-10)


@pytest.mark.slow
class TestLargeDegrees(CritLabTestCase):
    """Degree-1024 solves."""

    def test_random_zeros_at_degree_1024(self):
        """Test that 1024 random zeros give converged critical points that pass both checks."""
        zeros = RootSet(self.random_disk_points(1024, seed=41))

        report = critical_points(zeros)

        self.assertEqual(len(report), 1023)
        self.assertTrue(report.all_converged)
        self.assertEqual(gauss_lucas_violations(zeros, report.roots).size, 0)
        self.assertLess(vieta_mean_gap(zeros, report.roots), 1e-9)
