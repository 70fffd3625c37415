"""
Experiment configuration files.

One TOML document describes one experiment::

    name = "pairwise"
    n_ladder = [64, 128, 256]
    trials = 20
    master_seed = 2024
    metrics = ["w1_exact"]
    probes = ["a1a2"]

    [ensemble]
    kind = "pairwise_choice"

    [probe]
    eps = 0.05

    [settings]
    WORKERS = 4
"""

import hashlib
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Optional, Tuple

import tomli_w

from ..conf import DEFAULTS
from ..ensembles import EnsembleSpec, validate_seed
from ..exceptions import ConfigError, InvalidSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

METRICS = ("w1_exact", "w1_sliced", "angular_discrepancy", "potential_field")
PROBES = ("a1a2", "a3", "poisson_jensen", "real_fraction", "mixture", "concentration")

GRID_DEFAULTS = {"half_width": 2.0, "count": 65}


@dataclass(frozen=True)
class ExperimentSpec:
    ensemble: EnsembleSpec
    n_ladder: Tuple[int, ...]
    name: str = "experiment"
    trials: int = 1
    metrics: Tuple[str, ...] = ("w1_exact",)
    probes: Tuple[str, ...] = ()
    master_seed: int = 0
    output_dir: str = "results"
    plot: bool = False
    reference_size: Optional[int] = None
    probe: Mapping[str, Any] = field(default_factory=dict)
    grid: Mapping[str, Any] = field(default_factory=dict)
    settings: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "n_ladder", tuple(int(n) for n in self.n_ladder))
        object.__setattr__(self, "metrics", tuple(self.metrics))
        object.__setattr__(self, "probes", tuple(self.probes))
        object.__setattr__(self, "grid", {**GRID_DEFAULTS, **dict(self.grid)})
        object.__setattr__(self, "probe", dict(self.probe))
        object.__setattr__(self, "settings", dict(self.settings))
        self.validate()

    def validate(self):
        ladder = self.n_ladder
        if not ladder or ladder[0] < 1 or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise InvalidSpec("n_ladder must be a strictly increasing list of positive integers")
        if self.trials < 1:
            raise InvalidSpec("trials must be at least 1")
        unknown = sorted(set(self.metrics) - set(METRICS))
        if unknown:
            raise InvalidSpec(f"unknown metrics: {', '.join(unknown)}")
        unknown = sorted(set(self.probes) - set(PROBES))
        if unknown:
            raise InvalidSpec(f"unknown probes: {', '.join(unknown)}")
        unknown = sorted(set(self.settings) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"Unknown settings: {', '.join(unknown)}")
        validate_seed(self.master_seed)
        if self.reference_size is not None and self.reference_size < 1:
            raise InvalidSpec("reference_size must be positive")
        return self

    @property
    def max_degree(self) -> int:
        return self.ensemble.degree(self.n_ladder[-1])

    def to_dict(self) -> dict:
        data = {
            "name": self.name,
            "n_ladder": list(self.n_ladder),
            "trials": self.trials,
            "metrics": list(self.metrics),
            "probes": list(self.probes),
            "master_seed": self.master_seed,
            "output_dir": self.output_dir,
            "plot": self.plot,
            "ensemble": self.ensemble.to_dict(),
            "grid": dict(self.grid),
        }
        if self.reference_size is not None:
            data["reference_size"] = self.reference_size
        if self.probe:
            data["probe"] = _tomlable(dict(self.probe))
        if self.settings:
            data["settings"] = dict(self.settings)
        return data

    def spec_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_overrides(self, **changes) -> "ExperimentSpec":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _tomlable(value):
    if isinstance(value, Mapping):
        return {k: _tomlable(v) for k, v in value.items() if v is not None}
    if isinstance(value, (list, tuple)):
        return [_tomlable(v) for v in value]
    return value


KNOWN_KEYS = {
    "name",
    "n_ladder",
    "trials",
    "metrics",
    "probes",
    "master_seed",
    "output_dir",
    "plot",
    "reference_size",
    "ensemble",
    "probe",
    "grid",
    "settings",
}


def spec_from_dict(data: Mapping[str, Any]) -> ExperimentSpec:
    data = dict(data)
    unknown = sorted(set(data) - KNOWN_KEYS)
    if unknown:
        raise InvalidSpec(f"unknown experiment keys: {', '.join(unknown)}")
    for key in ("ensemble", "n_ladder"):
        if key not in data:
            raise InvalidSpec(f"experiment config needs '{key}'")
    if not isinstance(data["ensemble"], Mapping):
        raise InvalidSpec("[ensemble] must be a table")
    data["ensemble"] = EnsembleSpec.from_dict(data["ensemble"])
    try:
        return ExperimentSpec(**data)
    except TypeError as exc:
        raise InvalidSpec(str(exc)) from exc


def parse_spec(text: str) -> ExperimentSpec:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InvalidSpec(f"invalid TOML: {exc}") from exc
    return spec_from_dict(data)


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InvalidSpec(f"cannot read {path}: {exc}") from exc
    return parse_spec(text)


def dump_spec(spec: ExperimentSpec) -> str:
    return tomli_w.dumps(spec.to_dict())
