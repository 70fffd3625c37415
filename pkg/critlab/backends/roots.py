import logging

import numpy as np

from ..polycore import Polynomial, RootSet, derivative, evaluate, poly_from_roots
from ..rootfind import RootFindReport, aberth_roots, companion_roots, critical_points
from .base import LabAbstractInterface

logger = logging.getLogger(__name__)


class RootFinderInterface(LabAbstractInterface):
    """
    Interface for finding zeros of polynomials and critical points of root sets.
    """

    BACKEND_KEY = "root_finder_backend"
    DEFAULT_BACKEND = "critlab.backends.AberthRootFinder"

    def roots(self, p: Polynomial) -> RootFindReport:
        """All zeros of p."""
        return self.backend.roots(p)

    def critical_points(self, zeros: RootSet) -> RootFindReport:
        """The n - 1 critical points of the monic polynomial with these zeros."""
        return self.backend.critical_points(zeros)


class AberthRootFinder:
    """Backend running simultaneous Aberth iteration; critical points from root form."""

    BACKEND_DESCRIPTION = "Aberth-Ehrlich iteration, root-form critical points"
    METHOD = "aberth"

    def roots(self, p: Polynomial) -> RootFindReport:
        return aberth_roots(p)

    def critical_points(self, zeros: RootSet) -> RootFindReport:
        return critical_points(zeros)


class CompanionRootFinder:
    """Backend using dense companion eigenvalues; small degrees only."""

    BACKEND_DESCRIPTION = "Companion-matrix eigenvalues (degree <= COMPANION_MAX_DEGREE)"
    METHOD = "companion"

    def _report(self, p, roots):
        residuals = np.array(
            [1.0 / evaluate(p, root).condition for root in roots.atoms.tolist()]
        )
        return RootFindReport(
            roots=roots,
            iterations=0,
            max_residual=float(residuals.max()) if residuals.size else 0.0,
            converged=np.ones(len(roots), dtype=bool),
            residuals=residuals,
            method=self.METHOD,
        )

    def roots(self, p: Polynomial) -> RootFindReport:
        return self._report(p, companion_roots(p))

    def critical_points(self, zeros: RootSet) -> RootFindReport:
        slope = derivative(poly_from_roots(zeros))
        logger.debug("companion critical points for degree %d", slope.degree)
        return self._report(slope, companion_roots(slope))
