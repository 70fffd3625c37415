import functools
import os
from contextlib import contextmanager

DEFAULTS = {
    # root finding
    "ABERTH_TOL": 1e-12,
    "ABERTH_MAX_ITER": 500,
    "MERGE_TOL": 1e-12,
    "SYMMETRY_TOL": 1e-9,
    "COMPENSATED_DEGREE": 4096,
    "EXPAND_MAX_DEGREE": 512,
    "COMPANION_MAX_DEGREE": 64,
    "MATCH_MAX_SIZE": 4096,
    "STRICT_CONVERGENCE": True,
    # transport and measures
    "W1_EXACT_MAX_PAIRS": 2**22,
    "W1_NUM_ITER_MAX": 10_000_000,
    "SLICED_PROJECTIONS": 64,
    "CHUNK_ENTRIES": 2**22,
    "ERDOS_TURAN_C": 1.0,
    # diagnostics
    "EXCISION_FRACTION": 1e-4,
    "MAX_EXCISION_OVERLAP": 0.5,
    # harness
    "REFERENCE_FACTOR": 4,
    "WORKERS": None,
    # backends
    "root_finder_backend": "critlab.backends.AberthRootFinder",
    "transport_backend": "critlab.backends.AutoTransportBackend",
}

WORKERS_ENV_VAR = "CRITLAB_WORKERS"

_user_config = {}


def configure(settings=None, **values):
    """Install user settings; unknown keys are rejected."""
    merged = dict(settings or {})
    merged.update(values)
    unknown = sorted(set(merged) - set(DEFAULTS))
    if unknown:
        from .exceptions import ConfigError

        raise ConfigError(f"Unknown settings: {', '.join(unknown)}")
    _user_config.update(merged)


def reset_config():
    _user_config.clear()


def get_config(key=None):
    if key is None:
        return dict(_user_config)
    if key == "WORKERS" and key not in _user_config:
        env_value = os.environ.get(WORKERS_ENV_VAR)
        if env_value:
            return int(env_value)
    return _user_config.get(key, DEFAULTS[key])


def effective_config():
    """Every setting with user values applied, for provenance records."""
    return {key: get_config(key) for key in DEFAULTS}


class override_config:
    """
    Temporarily override settings. Works as a context manager and as a
    decorator on functions or TestCase classes.
    """

    def __init__(self, **values):
        self.values = values
        self._saved = None

    def __enter__(self):
        self._saved = dict(_user_config)
        configure(**self.values)
        return self

    def __exit__(self, exc_type, exc, tb):
        _user_config.clear()
        _user_config.update(self._saved)
        return False

    def __call__(self, target):
        if isinstance(target, type):
            return self._decorate_class(target)

        @functools.wraps(target)
        def wrapper(*args, **kwargs):
            with override_config(**self.values):
                return target(*args, **kwargs)

        return wrapper

    def _decorate_class(self, cls):
        for name in dir(cls):
            if name.startswith("test"):
                method = getattr(cls, name)
                if callable(method):
                    setattr(cls, name, override_config(**self.values)(method))
        return cls


@contextmanager
def settings_scope(settings):
    """Apply a settings mapping (e.g. an experiment's [settings] table) for a block."""
    with override_config(**dict(settings or {})):
        yield
