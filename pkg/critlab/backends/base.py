import importlib

from ..conf import get_config
from ..exceptions import ConfigError


class LabAbstractInterface:
    """
    Front for a numerical method that can be swapped through settings.

    Subclasses name the settings key holding a dotted class path
    (``BACKEND_KEY``) and the class used when it is unset
    (``DEFAULT_BACKEND``). Backend classes may carry ``BACKEND_DESCRIPTION``
    and ``METHOD``; both end up in the provenance of result files.
    """

    BACKEND_KEY = None
    DEFAULT_BACKEND = None

    def __init__(self, backend_path=None, **options):
        if backend_path is None:
            backend_path = self._get_backend_path_from_settings()
        self.backend = self._load_backend_class(backend_path)(**options)

    def _get_backend_path_from_settings(self):
        if self.BACKEND_KEY is None:
            raise NotImplementedError(f"{type(self).__name__} must define BACKEND_KEY")
        return get_config(self.BACKEND_KEY) or self.DEFAULT_BACKEND

    def _load_backend_class(self, backend_path):
        try:
            module_path, class_name = backend_path.rsplit(".", 1)
            return getattr(importlib.import_module(module_path), class_name)
        except (ValueError, ImportError, AttributeError) as exc:
            raise ConfigError(f"Cannot load backend {backend_path!r}: {exc}") from exc

    def get_backend_info(self):
        """Name, module, dotted path, description and method of the loaded backend."""
        backend_class = type(self.backend)
        return {
            "name": backend_class.__name__,
            "module": backend_class.__module__,
            "full_path": f"{backend_class.__module__}.{backend_class.__name__}",
            "description": getattr(backend_class, "BACKEND_DESCRIPTION", "No description available"),
            "method": getattr(backend_class, "METHOD", "unknown"),
        }
