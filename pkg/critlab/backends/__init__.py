from .base import LabAbstractInterface
from .roots import AberthRootFinder, CompanionRootFinder, RootFinderInterface
from .transport import (
    AutoTransportBackend,
    ExactTransportBackend,
    SlicedTransportBackend,
    TransportInterface,
)

__all__ = [
    "LabAbstractInterface",
    "RootFinderInterface",
    "AberthRootFinder",
    "CompanionRootFinder",
    "TransportInterface",
    "AutoTransportBackend",
    "ExactTransportBackend",
    "SlicedTransportBackend",
]
