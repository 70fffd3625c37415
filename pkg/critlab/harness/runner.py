"""
Experiment execution: (n, trial) tasks on a bounded process pool, then
probes, then a single writer for every result file.
"""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Optional, Tuple

import numpy as np

from .. import __version__
from ..backends import RootFinderInterface
from ..conf import effective_config, get_config, settings_scope
from ..diagnostics import (
    ProbeResult,
    QuadratureSpec,
    a1a2_probe,
    a3_probe,
    concentration_probe,
    mixture_limit_probe,
    poisson_jensen_residual,
    random_probe_point,
    rational_sum_for,
    real_critical_fraction,
)
from ..ensembles import EnsembleSpec, derive_seed, generate, reference_rootset
from ..exceptions import AtomAtOrigin, CritLabError, InvalidSpec
from ..measures import (
    EmpiricalMeasure,
    GridSpec,
    angular_discrepancy,
    compare_potentials,
    w1_exact,
    w1_sliced,
)
from ..polycore import RationalSum, RootSet
from ..rootfind import gauss_lucas_violations, rational_zeros, vieta_mean_gap
from .config import ExperimentSpec
from .plots import plot_result
from .results import PAIRS, ExperimentResult, TrialRow, summarize, value_columns, write_results

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialOutcome:
    row: TrialRow
    zeros: Optional[np.ndarray] = None
    critical: Optional[np.ndarray] = None


def worker_count(tasks: int) -> int:
    workers = get_config("WORKERS") or os.cpu_count() or 1
    return max(1, min(int(workers), tasks))


def map_tasks(func, tasks, workers):
    """Ordered map over tasks; one worker runs inline."""
    if workers <= 1:
        return [func(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks, chunksize=1))


# -- trials --------------------------------------------------------------------------


def _pair_values(metric, measures, spec, seed):
    values = {}
    for pair in PAIRS:
        first, second = {
            "zeros_ref": ("zeros", "reference"),
            "crit_ref": ("critical", "reference"),
            "crit_zeros": ("critical", "zeros"),
        }[pair]
        mu, nu = measures[first], measures[second]
        column = f"{pair}_{metric}"
        if mu is None or nu is None:
            values[column] = None
        elif metric == "w1_exact":
            values[column] = w1_exact(mu, nu)
        elif metric == "w1_sliced":
            values[column] = w1_sliced(mu, nu, seed=seed)
        else:
            grid = GridSpec.square(float(spec.grid["half_width"]), int(spec.grid["count"]))
            values[column] = compare_potentials(mu, nu, grid, spec.grid.get("mask_distance"))
    return values


def _angular(measure):
    if measure is None:
        return None
    try:
        return angular_discrepancy(measure)
    except AtomAtOrigin:
        return None


def _measure_trial(spec, reference, n, trial, seed, keep_atoms):
    drawn = generate(spec.ensemble, n, seed)
    if isinstance(drawn, RationalSum):
        zeros = RootSet(drawn.poles)
        report = rational_zeros(drawn)
        violations = vieta = None
    else:
        zeros = drawn
        report = RootFinderInterface().critical_points(zeros)
        converged = RootSet(report.roots.atoms[report.converged])
        violations = int(gauss_lucas_violations(zeros, converged).size)
        vieta = vieta_mean_gap(zeros, report.roots)
    critical = report.roots
    measures = {
        "zeros": EmpiricalMeasure.from_rootset(zeros),
        "critical": EmpiricalMeasure.from_rootset(critical) if len(critical) else None,
        "reference": reference,
    }
    values = {}
    for metric in spec.metrics:
        if metric == "angular_discrepancy":
            values["zeros_angular_discrepancy"] = _angular(measures["zeros"])
            values["crit_angular_discrepancy"] = _angular(measures["critical"])
        else:
            values.update(_pair_values(metric, measures, spec, seed))
    row = TrialRow(
        n=n,
        trial=trial,
        seed=seed,
        degree=len(zeros),
        critical_count=len(critical),
        converged=report.all_converged,
        max_residual=report.max_residual,
        gauss_lucas_violations=violations,
        vieta_gap=vieta,
        values=values,
    )
    if keep_atoms:
        return TrialOutcome(row, np.asarray(zeros.atoms), np.asarray(critical.atoms))
    return TrialOutcome(row)


def run_trial(spec: ExperimentSpec, reference_atoms, task) -> TrialOutcome:
    """One (n, trial) task. Library errors become a flagged row."""
    n, trial = task
    seed = derive_seed(spec.master_seed, trial)
    keep_atoms = trial == 0 and n == spec.n_ladder[-1]
    with settings_scope(spec.settings):
        try:
            reference = EmpiricalMeasure.from_atoms(reference_atoms)
            return _measure_trial(spec, reference, n, trial, seed, keep_atoms)
        except CritLabError as exc:
            logger.warning("n=%d trial=%d failed: %s", n, trial, exc)
            return TrialOutcome(
                TrialRow(n=n, trial=trial, seed=seed, error=f"{type(exc).__name__}: {exc}")
            )


# -- probes --------------------------------------------------------------------------


def _probe_point(spec):
    value = spec.probe.get("z")
    if value is None or value == "random":
        return random_probe_point(spec.master_seed, float(spec.probe.get("radius", 1.0)))
    if isinstance(value, (list, tuple)):
        return complex(value[0], value[1])
    return complex(value)


def _probe_ladder(spec):
    return list(spec.probe.get("n_values", spec.n_ladder))


def _probe_trials(spec):
    return int(spec.probe.get("trials", spec.trials))


def _poisson_jensen_probe(spec):
    R = float(spec.probe.get("R", 1.5))
    quad_points = int(spec.probe.get("quad_points", 4096))
    z = _probe_point(spec)
    ladder = _probe_ladder(spec)
    trials = _probe_trials(spec)
    worst = []
    for n in ladder:
        residuals = [
            poisson_jensen_residual(
                rational_sum_for(spec.ensemble, n, derive_seed(spec.master_seed, t)), R, z, quad_points
            )
            for t in range(trials)
        ]
        worst.append(max(residuals))
    return (
        ProbeResult(
            ladder, worst, [0.0] * len(ladder), trials, spec.master_seed,
            label="poisson_jensen", parameters={"R": R, "z": z, "quad_points": quad_points},
        ),
    )


def _mixture_probe(spec):
    if "b_ensemble" not in spec.probe:
        raise InvalidSpec("the mixture probe needs a [probe.b_ensemble] table")
    b_spec = EnsembleSpec.from_dict(spec.probe["b_ensemble"])
    p = float(spec.probe.get("p", 0.5))
    ladder = _probe_ladder(spec)
    trials = _probe_trials(spec)
    means, errors = [], []
    for n in ladder:
        distances = np.array(
            [
                mixture_limit_probe(spec.ensemble, b_spec, p, n, derive_seed(spec.master_seed, t))
                for t in range(trials)
            ]
        )
        means.append(distances.mean())
        errors.append(distances.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0)
    return (
        ProbeResult(
            ladder, means, errors, trials, spec.master_seed, label="mixture",
            parameters={"p": p, "b_ensemble": b_spec.to_dict()},
        ),
    )


def run_probe(kind: str, spec: ExperimentSpec) -> Tuple[ProbeResult, ...]:
    """Run one named probe with the parameters in the experiment's [probe] table."""
    probe = spec.probe
    seed = spec.master_seed
    with settings_scope(spec.settings):
        if kind == "a1a2":
            return a1a2_probe(
                spec.ensemble, _probe_point(spec), float(probe.get("eps", 0.05)),
                _probe_ladder(spec), _probe_trials(spec), seed,
            )
        if kind == "a3":
            quad = QuadratureSpec(**dict(probe.get("quad", {})))
            return (
                a3_probe(
                    spec.ensemble, float(probe.get("r", 2.0)), _probe_ladder(spec), quad,
                    int(probe.get("trials", 1)), seed,
                ),
            )
        if kind == "poisson_jensen":
            return _poisson_jensen_probe(spec)
        if kind == "real_fraction":
            return (
                real_critical_fraction(
                    _probe_ladder(spec), _probe_trials(spec), seed, float(probe.get("im_tol", 1e-8))
                ),
            )
        if kind == "mixture":
            return _mixture_probe(spec)
        if kind == "concentration":
            return (
                concentration_probe(
                    spec.ensemble, _probe_point(spec), float(probe.get("eps", 0.05)),
                    _probe_ladder(spec), max(2, _probe_trials(spec)), seed,
                ),
            )
    raise InvalidSpec(f"unknown probe {kind!r}")


def _safe_probe(kind, spec):
    try:
        return run_probe(kind, spec)
    except CritLabError as exc:
        logger.warning("probe %s failed: %s", kind, exc)
        return (ProbeResult((), (), (), 0, spec.master_seed, label=kind, error=f"{type(exc).__name__}: {exc}"),)


# -- experiments ---------------------------------------------------------------------


def provenance(spec: ExperimentSpec, reference_size: int) -> dict:
    settings = effective_config()
    settings.pop("WORKERS", None)
    return {
        "spec_hash": spec.spec_hash(),
        "master_seed": spec.master_seed,
        "version": __version__,
        "reference_size": reference_size,
        "reference_bias_scale": 1.0 / reference_size,
        "root_finder": RootFinderInterface().get_backend_info()["full_path"],
        "settings": settings,
    }


def run(spec: ExperimentSpec, output_dir=None, write: bool = True) -> ExperimentResult:
    """
    Generate, solve and measure every (n, trial), run the configured probes,
    then write rows, summaries and plots.
    """
    with settings_scope(spec.settings):
        reference_size = spec.reference_size or get_config("REFERENCE_FACTOR") * spec.max_degree
        reference = reference_rootset(spec.ensemble, reference_size, spec.master_seed)
        tasks = [(n, trial) for n in spec.n_ladder for trial in range(spec.trials)]
        workers = worker_count(len(tasks))
        logger.info(
            "running %s: %d tasks on %d workers, reference size %d",
            spec.name, len(tasks), workers, reference_size,
        )
        outcomes = map_tasks(partial(run_trial, spec, np.asarray(reference.atoms)), tasks, workers)
        rows = tuple(outcome.row for outcome in outcomes)
        samples = {
            outcome.row.n: (outcome.zeros, outcome.critical)
            for outcome in outcomes
            if outcome.zeros is not None
        }
        probes = tuple(result for kind in spec.probes for result in _safe_probe(kind, spec))
        result = ExperimentResult(
            spec=spec,
            rows=rows,
            summary=summarize(rows, value_columns(spec.metrics)),
            provenance=provenance(spec, reference_size),
            probes=probes,
            samples=samples,
        )
    if result.failed_rows:
        logger.warning("%d of %d rows failed", result.failed_rows, len(rows))
    if write:
        out = write_results(result, output_dir or spec.output_dir)
        if spec.plot:
            plot_result(result.summary, spec.metrics, samples, out, spec.name)
    return result
