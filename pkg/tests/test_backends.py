"""
Tests for swappable root-finding and transport backends.
"""

import numpy as np

from critlab.backends import (
    AberthRootFinder,
    CompanionRootFinder,
    RootFinderInterface,
    TransportInterface,
)
from critlab.conf import override_config
from critlab.ensembles import roots_of_unity
from critlab.exceptions import ConfigError
from critlab.measures import EmpiricalMeasure
from critlab.polycore import Polynomial, RootSet

from .base import CritLabTestCase


class TestBackendLoading(CritLabTestCase):
    """Test cases for resolving backend classes."""

    def test_default_root_finder(self):
        """Test that the root finder defaults to the Aberth backend."""
        interface = RootFinderInterface()

        self.assertIsInstance(interface.backend, AberthRootFinder)

    def test_backend_from_settings(self):
        """Test that the backend path is read from the settings."""
        with override_config(root_finder_backend="critlab.backends.CompanionRootFinder"):
            interface = RootFinderInterface()

        self.assertIsInstance(interface.backend, CompanionRootFinder)

    def test_explicit_path_wins(self):
        """Test that an explicit backend path and its options reach the backend."""
        interface = TransportInterface("critlab.backends.SlicedTransportBackend", seed=3)

        self.assertEqual(interface.backend.seed, 3)

    def test_bad_paths(self):
        """Test that malformed or unknown backend paths raise ConfigError."""
        for path in ("nodots", "critlab.backends.Missing", "no_such_module.Backend"):
            with self.subTest(path=path):
                with self.assertRaises(ConfigError):
                    RootFinderInterface(path)

    def test_backend_info(self):
        """Test that backend info names the class, module, path and method."""
        info = RootFinderInterface("critlab.backends.CompanionRootFinder").get_backend_info()

        self.assertEqual(info["name"], "CompanionRootFinder")
        self.assertEqual(info["module"], "critlab.backends.roots")
        self.assertEqual(info["full_path"], "critlab.backends.roots.CompanionRootFinder")
        self.assertEqual(info["method"], "companion")


class TestRootFinders(CritLabTestCase):
    """Test cases for the two root-finding backends."""

    def test_backends_agree(self):
        """Test that both root finders return the same roots."""
        p = Polynomial([2, -3, 0, 1, 1])

        aberth = RootFinderInterface().roots(p).roots
        companion = RootFinderInterface("critlab.backends.CompanionRootFinder").roots(p).roots

        self.assertMatched(aberth, companion, 1e-7)

    def test_companion_critical_points(self):
        """Test that the companion backend finds the zeros of P'."""
        report = RootFinderInterface("critlab.backends.CompanionRootFinder").critical_points(
            RootSet([1, -1, 2j])
        )

        self.assertEqual(report.method, "companion")
        self.assertEqual(len(report.roots), 2)
        # P' = 3z^2 - 4iz - 1
        expected = np.roots([3, -4j, -1])
        self.assertMatched(report.roots, expected, 1e-7)

    def test_aberth_critical_points(self):
        """Test that the Aberth backend puts the critical points of the roots of unity at 0."""
        report = RootFinderInterface().critical_points(roots_of_unity(6))

        self.assertAllNear(report.roots, 0, 1e-12)


class TestTransportBackends(CritLabTestCase):
    """Test cases for choosing between exact and sliced transport."""

    def setUp(self):
        super().setUp()
        self.mu = EmpiricalMeasure.from_atoms([0, 1, 2])
        self.nu = EmpiricalMeasure.from_atoms([0, 1j])

    def test_auto_uses_exact_transport_below_the_limit(self):
        """Test that auto transport is exact while the pair count is under the limit."""
        interface = TransportInterface()

        self.assertEqual(interface.method_for(self.mu, self.nu), "w1_exact")

    def test_auto_falls_back_to_sliced(self):
        """Test that auto transport switches to the sliced distance above the limit."""
        interface = TransportInterface()

        with override_config(W1_EXACT_MAX_PAIRS=5):
            self.assertEqual(interface.method_for(self.mu, self.nu), "w1_sliced")
            distance = interface.distance(self.mu, self.nu)

        self.assertGreater(distance, 0.0)

    def test_exact_backend(self):
        """Test that the exact backend reports its method and gives 0 on equal measures."""
        interface = TransportInterface("critlab.backends.ExactTransportBackend")

        self.assertAlmostEqual(interface.distance(self.mu, self.mu), 0.0, places=12)
        self.assertEqual(interface.get_backend_info()["method"], "w1_exact")
