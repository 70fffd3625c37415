"""
SVG charts. Figures are built without pyplot so no global backend is touched,
and the SVG writer runs with a fixed hash salt and no date so repeated runs
produce identical files.
"""

import logging
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .results import PAIRS

logger = logging.getLogger(__name__)

SVG_RC = {"svg.hashsalt": "critlab", "svg.fonttype": "none"}
PAIR_LABELS = {
    "zeros_ref": "zeros vs reference",
    "crit_ref": "critical points vs reference",
    "crit_zeros": "critical points vs zeros",
}


def _save(figure, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(SVG_RC):
        figure.savefig(path, format="svg", metadata={"Date": None})
    logger.debug("wrote %s", path)
    return path


def scatter_svg(zeros, critical, path, title=""):
    """Zeros as hollow circles, critical points as filled dots."""
    zeros = np.asarray(zeros, dtype=complex)
    critical = np.asarray(critical, dtype=complex)
    figure = Figure(figsize=(6, 6))
    axes = figure.add_subplot()
    axes.scatter(zeros.real, zeros.imag, s=18, facecolors="none", edgecolors="tab:blue", label="zeros")
    axes.scatter(critical.real, critical.imag, s=6, color="tab:red", label="critical points")
    axes.set_aspect("equal")
    axes.set_xlabel("Re z")
    axes.set_ylabel("Im z")
    axes.legend(loc="upper right")
    if title:
        axes.set_title(title)
    return _save(figure, path)


def distance_chart_svg(summary, metric, path, title=""):
    """
    Log-log median distance against n for each measure pair, with the
    10%-90% quantile band and n^-1/2, n^-1 guides anchored at the first
    median.
    """
    figure = Figure(figsize=(7, 5))
    axes = figure.add_subplot()
    drawn = False
    anchor = None
    for pair in PAIRS:
        column = f"{pair}_{metric}"
        points = [
            entry
            for entry in summary
            if entry["column"] == column and entry["median"] is not None and entry["median"] > 0
        ]
        if not points:
            continue
        n = np.array([entry["n"] for entry in points], dtype=float)
        median = np.array([entry["median"] for entry in points])
        low = np.array([entry["q10"] for entry in points])
        high = np.array([entry["q90"] for entry in points])
        (line,) = axes.plot(n, median, marker="o", label=PAIR_LABELS[pair])
        axes.fill_between(n, low, high, color=line.get_color(), alpha=0.2, linewidth=0)
        if anchor is None:
            anchor = (n, median[0])
        drawn = True
    if not drawn:
        logger.info("no positive %s values to chart", metric)
        return None
    n, start = anchor
    for exponent, style in ((0.5, ":"), (1.0, "--")):
        axes.plot(n, start * (n / n[0]) ** -exponent, style, color="gray", label=f"n^-{exponent:g}")
    axes.set_xscale("log")
    axes.set_yscale("log")
    axes.set_xlabel("n")
    axes.set_ylabel(metric)
    axes.legend()
    if title:
        axes.set_title(title)
    return _save(figure, path)


def plot_result(summary, metrics, samples, output_dir, name=""):
    """Every chart for one result directory; returns the written paths."""
    output_dir = Path(output_dir)
    written = []
    for n, (zeros, critical) in sorted(samples.items()):
        written.append(scatter_svg(zeros, critical, output_dir / f"scatter_n{n}.svg", f"{name} n={n}"))
    for metric in metrics:
        if metric in ("w1_exact", "w1_sliced", "potential_field"):
            path = distance_chart_svg(summary, metric, output_dir / f"distance_{metric}.svg", name)
            if path is not None:
                written.append(path)
    return written
