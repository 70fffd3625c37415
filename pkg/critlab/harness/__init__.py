"""Experiment configs, execution, result files, charts and the command line."""

from .config import ExperimentSpec, dump_spec, load_spec, parse_spec
from .results import ExperimentResult, TrialRow
from .runner import run, run_probe

__all__ = [
    "ExperimentSpec",
    "ExperimentResult",
    "TrialRow",
    "dump_spec",
    "load_spec",
    "parse_spec",
    "run",
    "run_probe",
]
