"""
Result rows, per-n summaries and their files.

Output directory layout:

    rows.csv            one row per (n, trial)
    summary.csv         median and 10%/90% quantiles per (n, column)
    result.json         provenance, spec, summary and probe results
    probe_<label>.csv   one file per probe result
    zeros_n<N>.txt      atoms of trial 0 at the largest n
    critical_n<N>.txt
"""

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..atomfiles import read_atoms, write_atoms
from ..diagnostics import ProbeResult
from ..exceptions import InvalidSpec

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

PAIRS = ("zeros_ref", "crit_ref", "crit_zeros")
PAIR_METRICS = ("w1_exact", "w1_sliced", "potential_field")
BASE_COLUMNS = (
    "n",
    "trial",
    "seed",
    "degree",
    "critical_count",
    "converged",
    "max_residual",
    "gauss_lucas_violations",
    "vieta_gap",
)


def value_columns(metrics: Sequence[str]) -> Tuple[str, ...]:
    columns = []
    for metric in metrics:
        if metric in PAIR_METRICS:
            columns.extend(f"{pair}_{metric}" for pair in PAIRS)
        elif metric == "angular_discrepancy":
            columns.extend(("zeros_angular_discrepancy", "crit_angular_discrepancy"))
    return tuple(columns)


@dataclass(frozen=True)
class TrialRow:
    """Return type for one (n, trial) task."""

    n: int
    trial: int
    seed: int
    degree: int = 0
    critical_count: int = 0
    converged: bool = False
    max_residual: float = math.nan
    gauss_lucas_violations: Optional[int] = None
    vieta_gap: Optional[float] = None
    values: Mapping[str, Optional[float]] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    spec: Any
    rows: Tuple[TrialRow, ...]
    summary: Tuple[Dict[str, Any], ...]
    provenance: Mapping[str, Any]
    probes: Tuple[ProbeResult, ...] = ()
    samples: Mapping[int, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    @property
    def failed_rows(self) -> int:
        return sum(row.failed for row in self.rows)

    @property
    def columns(self) -> Tuple[str, ...]:
        return value_columns(self.spec.metrics)


def summarize(rows: Sequence[TrialRow], columns: Sequence[str]) -> Tuple[Dict[str, Any], ...]:
    """Median and 10%/90% quantiles of every value column at every n, skipping failed rows."""
    summary = []
    for n in sorted({row.n for row in rows}):
        selected = [row for row in rows if row.n == n and not row.failed]
        for column in columns:
            values = np.array(
                [row.values.get(column) for row in selected if row.values.get(column) is not None],
                dtype=float,
            )
            values = values[np.isfinite(values)]
            if values.size:
                q10, median, q90 = np.quantile(values, [0.1, 0.5, 0.9])
            else:
                q10 = median = q90 = None
            summary.append(
                {
                    "n": n,
                    "column": column,
                    "median": _number(median),
                    "q10": _number(q10),
                    "q90": _number(q90),
                    "count": int(values.size),
                }
            )
    return tuple(summary)


def _number(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _finite(value):
    """JSON has no NaN or infinity; they are written as null."""
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _csv_text(fieldnames, records):
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow({key: _cell(record.get(key)) for key in fieldnames})
    return buffer.getvalue()


def rows_csv(result: ExperimentResult) -> str:
    fieldnames = list(BASE_COLUMNS) + list(result.columns) + ["error"]
    records = []
    for row in result.rows:
        record = {name: getattr(row, name) for name in BASE_COLUMNS}
        record.update(row.values)
        record["error"] = row.error
        records.append(record)
    return _csv_text(fieldnames, records)


def summary_csv(result: ExperimentResult) -> str:
    return _csv_text(["n", "column", "median", "q10", "q90", "count"], result.summary)


def result_document(result: ExperimentResult) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "provenance": dict(result.provenance),
        "spec": result.spec.to_dict(),
        "rows": len(result.rows),
        "failed_rows": result.failed_rows,
        "summary": list(result.summary),
        "probes": [probe.to_dict() for probe in result.probes],
    }


def write_results(result: ExperimentResult, output_dir) -> Path:
    """Write every result file; text is produced deterministically from the result alone."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "rows.csv").write_text(rows_csv(result), encoding="utf-8")
    (out / "summary.csv").write_text(summary_csv(result), encoding="utf-8")
    document = json.dumps(
        _finite(result_document(result)), indent=2, sort_keys=True, allow_nan=False
    )
    (out / "result.json").write_text(document + "\n", encoding="utf-8")
    for probe in result.probes:
        (out / f"probe_{probe.label}.csv").write_text(probe.to_csv(), encoding="utf-8")
    for n, (zeros, critical) in sorted(result.samples.items()):
        write_atoms(out / f"zeros_n{n}.txt", zeros, header=f"zeros, n={n}, trial 0")
        write_atoms(out / f"critical_n{n}.txt", critical, header=f"critical points, n={n}, trial 0")
    logger.info("wrote %d rows to %s", len(result.rows), out)
    return out


def load_result_document(result_dir) -> dict:
    path = Path(result_dir) / "result.json"
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise InvalidSpec(f"cannot read {path}: {exc}") from exc
    if document.get("schema_version") != SCHEMA_VERSION:
        raise InvalidSpec(f"{path}: unsupported schema_version {document.get('schema_version')!r}")
    return document


def load_samples(result_dir) -> Dict[int, Tuple[np.ndarray, np.ndarray]]:
    samples = {}
    for zeros_path in sorted(Path(result_dir).glob("zeros_n*.txt")):
        n = int(zeros_path.stem[len("zeros_n") :])
        critical_path = zeros_path.with_name(f"critical_n{n}.txt")
        if critical_path.exists():
            samples[n] = (read_atoms(zeros_path)[0], read_atoms(critical_path)[0])
    return samples
