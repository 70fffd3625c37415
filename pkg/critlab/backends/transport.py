import logging

from ..conf import get_config
from ..measures import EmpiricalMeasure, w1_exact, w1_sliced
from .base import LabAbstractInterface

logger = logging.getLogger(__name__)


class TransportInterface(LabAbstractInterface):
    """
    Interface for Wasserstein-1 distances between empirical measures.
    """

    BACKEND_KEY = "transport_backend"
    DEFAULT_BACKEND = "critlab.backends.AutoTransportBackend"

    def distance(self, mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
        return self.backend.distance(mu, nu)

    def method_for(self, mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> str:
        """Name of the metric the backend will use for this pair."""
        return self.backend.method_for(mu, nu)


class ExactTransportBackend:
    BACKEND_DESCRIPTION = "Network simplex on the complete bipartite graph (POT)"
    METHOD = "w1_exact"

    def __init__(self, **options):
        pass

    def distance(self, mu, nu):
        return w1_exact(mu, nu)

    def method_for(self, mu, nu):
        return self.METHOD


class SlicedTransportBackend:
    BACKEND_DESCRIPTION = "Mean 1-D Wasserstein-1 over random projections"
    METHOD = "w1_sliced"

    def __init__(self, seed=0, n_projections=None, **options):
        self.seed = seed
        self.n_projections = n_projections

    def distance(self, mu, nu):
        return w1_sliced(mu, nu, self.n_projections, self.seed)

    def method_for(self, mu, nu):
        return self.METHOD


class AutoTransportBackend:
    """Exact transport while the coalesced pair count fits W1_EXACT_MAX_PAIRS, sliced above."""

    BACKEND_DESCRIPTION = "w1_exact below the pair limit, w1_sliced above it"
    METHOD = "auto"

    def __init__(self, seed=0, n_projections=None, **options):
        self.exact = ExactTransportBackend()
        self.sliced = SlicedTransportBackend(seed, n_projections)

    def method_for(self, mu, nu):
        pairs = mu.coalesced()[0].size * nu.coalesced()[0].size
        if pairs > get_config("W1_EXACT_MAX_PAIRS"):
            return SlicedTransportBackend.METHOD
        return ExactTransportBackend.METHOD

    def distance(self, mu, nu):
        if self.method_for(mu, nu) == SlicedTransportBackend.METHOD:
            logger.info("%d x %d atoms: falling back to sliced transport", len(mu), len(nu))
            return self.sliced.distance(mu, nu)
        return self.exact.distance(mu, nu)
