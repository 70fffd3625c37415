"""
Acceptance-scale checks: exact values on the deterministic families and
trend checks on the random ensembles. Run with ``pytest -m slow``.
"""

import math
from pathlib import Path

import numpy as np
import pytest

from critlab.conf import override_config
from critlab.diagnostics import (
    QuadratureSpec,
    a1a2_probe,
    a3_integral,
    poisson_jensen_residual,
    real_critical_fraction,
)
from critlab.ensembles import (
    EnsembleSpec,
    bit_reversed_circle,
    dyadic_sequence,
    example1_roots,
    generate,
    lemniscate_roots,
)
from critlab.harness import load_spec, parse_spec, run
from critlab.measures import (
    EmpiricalMeasure,
    GridSpec,
    angular_discrepancy,
    erdos_turan_rhs,
    field_sup_distance,
    function_field,
    potential_field,
    w1_exact,
    w1_sliced,
)
from critlab.polycore import Polynomial, RationalSum, RootSet
from critlab.rootfind import (
    aberth_roots,
    companion_roots,
    critical_points,
    gauss_lucas_violations,
    match_rootsets,
    vieta_mean_gap,
)

from .base import CritLabTestCase

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"

ZERO_KINDS = [
    ("pairwise_choice", {}),
    ("triangular_pairwise", {}),
    ("iid", {"law": "uniform_disk"}),
    ("iid", {"law": "complex_gaussian"}),
    ("perturbation", {}),
    ("bernoulli_thinning", {"p": 0.3}),
    ("random_deletion", {}),
    ("deterministic", {"family": "truncated_roots_of_unity"}),
    ("deterministic", {"family": "example1"}),
    ("deterministic", {"family": "lemniscate"}),
    ("cauchy_pairs", {}),
]


def double_root_polynomial(n):
    coeffs = np.zeros(n + 2)
    coeffs[0], coeffs[n], coeffs[n + 1] = 1, -(n + 1), n
    return Polynomial(coeffs)


@pytest.mark.slow
class TestDeterministicGoldens(CritLabTestCase):
    """Exact critical measures of the deterministic families."""

    def test_unit_circle_run(self):
        """Test that the roots of unity keep distance 1 from the circle at every n of the ladder."""
        spec = parse_spec(
            """
            n_ladder = [64, 128, 256, 512, 1024]
            metrics = ["w1_exact"]
            [ensemble]
            kind = "deterministic"
            family = "roots_of_unity"
            """
        )

        result = run(spec, write=False)

        for row in result.rows:
            self.assertAlmostEqual(row.values["crit_ref_w1_exact"], 1.0, delta=0.02)

    def test_two_circles(self):
        """Test that two circles of zeros put n - 1 critical points at the origin."""
        atoms = critical_points(example1_roots([1.0, 2.0], 64)).roots.atoms

        self.assertEqual(atoms.size, 127)
        self.assertEqual(int(np.sum(np.abs(atoms) < 1e-8)), 63)

    def test_lemniscate_mass_at_each_zero(self):
        """Test that each zero of P carries (n - 1)/(kn - 1) of the critical mass of P^n - 1."""
        atoms = critical_points(lemniscate_roots(Polynomial([-0.09, 0, 1]), 16)).roots.atoms

        for zero in (0.3, -0.3):
            mass = np.sum(np.abs(atoms - zero) < 1e-8) / atoms.size
            self.assertAlmostEqual(mass, 15 / 31, places=12)

    def test_dyadic_prefixes(self):
        """Test that every power-of-two prefix of the dyadic sequence has all critical points at 0."""
        for m in range(1, 10):
            with self.subTest(m=m):
                report = critical_points(dyadic_sequence(2**m))
                self.assertAllNear(report.roots, 0, 1e-8)


@pytest.mark.slow
class TestRandomEnsembles(CritLabTestCase):
    """Structural identities and convergence trends for the random ensembles."""

    def test_gauss_lucas_and_vieta(self):
        """Test that critical points stay in the hull and keep the mean of the zeros across ensembles."""
        rng = self.rng(29)
        for index in range(200):
            kind, params = ZERO_KINDS[index % len(ZERO_KINDS)]
            spec = EnsembleSpec(kind, params)
            n = int(rng.integers(8, 513))
            while spec.degree(n) > 512:
                n //= 2
            with self.subTest(index=index, kind=kind, params=params, n=n):
                zeros = generate(spec, n, seed=index)
                report = critical_points(zeros)
                converged = RootSet(report.roots.atoms[report.converged])
                self.assertEqual(gauss_lucas_violations(zeros, converged).size, 0)
                self.assertLess(vieta_mean_gap(zeros, report.roots), 1e-9)

    def test_pairwise_choice_distance_decreases(self):
        """Test that the pairwise choice distance to the reference halves over the ladder."""
        spec = load_spec(CONFIG_DIR / "pairwise_choice.toml").with_overrides(
            metrics=("w1_exact",), probes=(), plot=False
        )
        self.assertEqual(spec.n_ladder, (64, 128, 256, 512, 1024))
        self.assertEqual(spec.trials, 20)
        self.assertIsNone(spec.reference_size)

        result = run(spec, write=False)

        self.assertEqual(result.failed_rows, 0)
        self.assertEqual(result.provenance["reference_size"], 4096)
        medians = [
            entry["median"] for entry in result.summary if entry["column"] == "crit_ref_w1_exact"
        ]
        self.assertEqual(len(medians), 5)
        for smaller, larger in zip(medians, medians[1:]):
            self.assertLess(larger, smaller)
        self.assertLessEqual(medians[-1], 0.5 * medians[0])

    def test_pairwise_choice_tail_probabilities_shrink(self):
        """Test that both tail probabilities at n = 512 are no higher than at n = 64."""
        a1, a2 = a1a2_probe(
            EnsembleSpec("pairwise_choice"), 0.37 + 0.41j, 0.05, [64, 512], trials=200, seed=20240517
        )

        for result in (a1, a2):
            with self.subTest(label=result.label):
                self.assertLessEqual(result.estimates[1], result.estimates[0])

    def test_real_critical_points_are_rare(self):
        """Test that the real fraction of critical points shrinks as n grows."""
        small = real_critical_fraction(50, trials=50, seed=9)
        large = real_critical_fraction(500, trials=50, seed=9)

        self.assertLess(large.estimates[0], small.estimates[0])

    def test_a3_stays_bounded(self):
        """Test that the disk integral of log^2 |L_n| stays within a factor 3 along the ladder."""
        spec = EnsembleSpec("pairwise_choice")
        quad = QuadratureSpec(angular_points=512)

        values = [a3_integral(spec, 2.0, n, quad, seed=1) for n in (64, 128, 256, 512, 1024)]

        self.assertLessEqual(max(values) / min(values), 3.0)


@pytest.mark.slow
class TestNumericalIdentities(CritLabTestCase):
    """Identity checks over corpora of random inputs."""

    def test_poisson_jensen_corpus(self):
        """Test that the Poisson-Jensen residual is small for random rational sums."""
        rng = self.rng(17)
        for index in range(25):
            size = int(rng.integers(1, 9))
            with self.subTest(index=index, size=size):
                poles = self.random_disk_points(size, seed=100 + index)
                L = RationalSum(rng.random(size) + 0.5, poles)
                self.assertLessEqual(poisson_jensen_residual(L, 1.5, 1.2 + 0.3j), 1e-6)

    def test_potential_of_the_circle(self):
        """Test that the circle's potential approaches log+ |z| away from the circle."""
        mu = EmpiricalMeasure.from_rootset(bit_reversed_circle(4096))
        grid = GridSpec.square(2.0, 65)
        mask = np.abs(np.abs(grid.nodes()) - 1.0) >= 0.2

        expected = function_field(lambda z: np.log(np.maximum(np.abs(z), 1.0)), grid)

        self.assertLessEqual(field_sup_distance(potential_field(mu, grid), expected, mask), 5e-3)

    def test_root_finder_oracle(self):
        """Test that Aberth and the companion eigensolver agree to 1e-8 on random polynomials."""
        rng = self.rng(23)
        for index in range(100):
            degree = int(rng.integers(2, 65))
            with self.subTest(index=index, degree=degree):
                coeffs = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
                coeffs[-1] = 1.0
                p = Polynomial(coeffs)
                distance = match_rootsets(aberth_roots(p).roots, companion_roots(p))
                self.assertLessEqual(distance, 1e-8)

    @override_config(STRICT_CONVERGENCE=False)
    def test_erdos_turan_scaling(self):
        """Test that the angular discrepancy of the double-root polynomial decreases and obeys its bound."""
        values = {}
        for n in (128, 512, 2048):
            p = double_root_polynomial(n)
            roots = aberth_roots(p).roots
            values[n] = angular_discrepancy(EmpiricalMeasure.from_rootset(roots))

        self.assertGreater(values[128], values[512])
        self.assertGreater(values[512], values[2048])
        self.assertLessEqual(values[2048], 3 * math.sqrt(erdos_turan_rhs(double_root_polynomial(2048), 1)))

    def test_transport_metric_axioms(self):
        """Test that exact Wasserstein-1 is symmetric, vanishes on the diagonal and obeys the triangle inequality."""
        rng = self.rng(31)
        for index in range(100):
            sizes = rng.integers(1, 21, size=3)
            measures = [
                EmpiricalMeasure.from_atoms(self.random_disk_points(int(size), seed=1000 + 3 * index + k))
                for k, size in enumerate(sizes)
            ]
            a, b, c = measures
            with self.subTest(index=index):
                ab, bc, ac = w1_exact(a, b), w1_exact(b, c), w1_exact(a, c)
                self.assertAlmostEqual(w1_exact(a, a), 0.0, delta=1e-9)
                self.assertAlmostEqual(ab, w1_exact(b, a), delta=1e-9)
                self.assertLessEqual(ac, ab + bc + 1e-9)
                self.assertLessEqual(w1_sliced(a, b, 16, seed=index), ab + 1e-9)
