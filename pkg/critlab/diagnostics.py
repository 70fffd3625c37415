"""
Probes of the analytic statements behind critical-point convergence.

Everything here is a pure function of its inputs and seed. Trials use
``derive_seed(seed, trial)`` so the same trial index sees the same ensemble
draw at every n.
"""

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Mapping, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import roots_legendre

from .backends import TransportInterface
from .conf import get_config
from .ensembles import (
    STREAM_CHOICE,
    STREAM_PROBE,
    EnsembleKind,
    EnsembleSpec,
    derive_seed,
    generate,
    reference_rootset,
    stream,
    validate_seed,
)
from .exceptions import (
    InvalidSpec,
    PoleHit,
    QuadratureFailure,
    SingularityOnCircle,
    TooLarge,
    ValidationError,
    ZeroAtEvaluationPoint,
)
from .measures import EmpiricalMeasure
from .polycore import (
    RationalSum,
    RootSet,
    eval_rational,
    log_abs_sums,
    numerator_polynomial,
    rational_sums,
)
from .rootfind import aberth_roots, critical_points, rational_zeros

logger = logging.getLogger(__name__)

MAX_PROBE_RESAMPLES = 8


@dataclass(frozen=True, eq=False)
class ProbeResult:
    """Per-n estimates from one probe run."""

    n_values: Sequence[int]
    estimates: Sequence[float]
    stderr: Sequence[float]
    trials: int
    seed: int
    label: str = ""
    parameters: Mapping[str, Any] = field(default_factory=dict)
    error: Optional[str] = None

    CSV_COLUMNS = ("n", "estimate", "stderr", "trials", "seed")

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "estimates", tuple(float(v) for v in self.estimates))
        object.__setattr__(self, "stderr", tuple(float(v) for v in self.stderr))
        if not len(self.n_values) == len(self.estimates) == len(self.stderr):
            raise ValidationError("one estimate and one stderr per n are required")

    def rows(self):
        for n, estimate, stderr in zip(self.n_values, self.estimates, self.stderr):
            yield {
                "n": n,
                "estimate": estimate,
                "stderr": stderr,
                "trials": self.trials,
                "seed": self.seed,
            }

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=self.CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        return buffer.getvalue()

    def to_dict(self) -> dict:
        data = asdict(self)
        data["n_values"] = list(self.n_values)
        data["estimates"] = list(self.estimates)
        data["stderr"] = list(self.stderr)
        data["parameters"] = _jsonable(dict(self.parameters))
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _jsonable(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _binomial_stderr(p, trials):
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)


def _check_ladder(n_values):
    ladder = [int(n) for n in n_values]
    if not ladder or any(n < 1 for n in ladder) or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise InvalidSpec("n_values must be a strictly increasing list of positive integers")
    return ladder


def _check_trials(trials):
    if int(trials) < 1:
        raise InvalidSpec("trials must be at least 1")
    return int(trials)


def rational_sum_for(spec: EnsembleSpec, n: int, seed) -> RationalSum:
    """L_n for one draw: the generated sum itself, or P'/P of the generated zeros."""
    drawn = generate(spec, n, seed)
    if isinstance(drawn, RationalSum):
        return drawn
    return RationalSum.logarithmic_derivative(drawn)


def random_probe_point(seed, radius: float = 1.0) -> complex:
    """A point drawn uniformly from the disk of the given radius."""
    u, v = stream(validate_seed(seed), STREAM_PROBE).random(2)
    point = radius * math.sqrt(u) * complex(math.cos(2 * math.pi * v), math.sin(2 * math.pi * v))
    logger.info("probe point %s drawn from seed %d", point, seed)
    return point


# -- tail probabilities of (1/n) log|L_n| ----------------------------------------


def _normalized_log_values(spec, z, ladder, trials, seed):
    values = np.empty((len(ladder), trials))
    for row, n in enumerate(ladder):
        for trial in range(trials):
            L = rational_sum_for(spec, n, derive_seed(seed, trial))
            s1 = eval_rational(L, z).s1
            values[row, trial] = math.log(abs(s1)) / n if s1 != 0 else -math.inf
    return values


def a1a2_probe(spec: EnsembleSpec, z, eps: float, n_values, trials: int, seed):
    """
    Fractions of trials with (1/n) log|L_n(z)| > eps and < -eps, per n.

    If z coincides with a pole of some draw it is replaced by a fresh random
    point in the disk of radius |z| + 1 and the whole probe restarts.
    """
    if not eps > 0:
        raise InvalidSpec("eps must be positive")
    ladder = _check_ladder(n_values)
    trials = _check_trials(trials)
    seed = validate_seed(seed)
    z = complex(z)
    for attempt in range(MAX_PROBE_RESAMPLES + 1):
        try:
            values = _normalized_log_values(spec, z, ladder, trials, seed)
            break
        except PoleHit:
            if attempt == MAX_PROBE_RESAMPLES:
                raise
            resampled = random_probe_point(derive_seed(seed, attempt), radius=abs(z) + 1.0)
            logger.warning("probe point %s hits a pole; resampled to %s", z, resampled)
            z = resampled
    above = np.mean(values > eps, axis=1)
    below = np.mean(values < -eps, axis=1)
    parameters = {"z": z, "eps": eps, "ensemble": spec.to_dict()}
    return (
        ProbeResult(
            ladder, above, [_binomial_stderr(p, trials) for p in above], trials, seed,
            label="a1", parameters=parameters,
        ),
        ProbeResult(
            ladder, below, [_binomial_stderr(p, trials) for p in below], trials, seed,
            label="a2", parameters=parameters,
        ),
    )


# -- disk integral of log^2 |L_n| ------------------------------------------------


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Polar product rule on a disk: Gauss-Legendre in the radius on
    geometrically graded panels and the trapezoid rule in the angle.
    """

    radial_panels: int = 24
    radial_order: int = 16
    angular_points: int = 1024
    grading: float = 0.5
    excision: Optional[float] = None

    def __post_init__(self):
        if self.radial_panels < 1 or self.radial_order < 1 or self.angular_points < 3:
            raise ValidationError("quadrature needs at least one panel, one order and three angles")
        if not 0 < self.grading < 1:
            raise ValidationError("grading must lie in (0, 1)")

    def refined(self) -> "QuadratureSpec":
        return QuadratureSpec(
            self.radial_panels + 4,
            2 * self.radial_order,
            2 * self.angular_points,
            self.grading,
            self.excision,
        )

    def nodes(self, r: float):
        """Quadrature nodes and weights (including the Jacobian rho) for D_r."""
        edges = r * self.grading ** np.arange(self.radial_panels - 1, -1, -1, dtype=float)
        edges = np.concatenate(([0.0], edges))
        x, w = roots_legendre(self.radial_order)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        rho = (mid[:, None] + half[:, None] * x[None, :]).reshape(-1)
        rho_weights = (half[:, None] * w[None, :]).reshape(-1) * rho
        theta = 2 * np.pi * np.arange(self.angular_points) / self.angular_points
        points = rho[:, None] * np.exp(1j * theta)[None, :]
        weights = np.repeat(rho_weights * (2 * np.pi / self.angular_points), self.angular_points)
        return points.reshape(-1), weights


@dataclass(frozen=True, eq=False)
class LogModulusForm:
    """log|L(z)| = log|c| + sum_j k_j log|z - s_j| over distinct singular points."""

    log_scale: float
    centers: np.ndarray
    orders: np.ndarray

    def __call__(self, points):
        return self.log_scale + log_abs_sums(self.centers, points, self.orders)

    def smooth_part(self, index):
        others = np.ones(self.centers.size, dtype=bool)
        others[index] = False
        distances = np.abs(self.centers[index] - self.centers[others])
        return self.log_scale + float(np.dot(self.orders[others], np.log(distances)))


def log_modulus_form(L: RationalSum) -> LogModulusForm:
    """
    Factor L as c * prod(z - zeros) / prod(z - poles). Equal weights go
    through ``critical_points`` so rotational structure is solved exactly.
    """
    weights = np.asarray(L.weights)
    poles = np.asarray(L.poles)
    if weights.size >= 2 and np.all(weights == weights[0]):
        numerator_zeros = critical_points(RootSet(poles)).roots.atoms
        pole_atoms = poles
        total = complex(weights.sum())
    else:
        distinct, inverse = np.unique(poles, return_inverse=True)
        merged = np.zeros(distinct.size, dtype=complex)
        np.add.at(merged, inverse.reshape(-1), weights)
        keep = merged != 0
        distinct, merged = distinct[keep], merged[keep]
        numerator_zeros = rational_zeros(L).roots.atoms
        pole_atoms = distinct
        total = complex(merged.sum())
        if numerator_zeros.size < distinct.size - 1:
            total = complex(np.dot(merged, distinct))
    singular = np.concatenate([numerator_zeros, pole_atoms])
    orders = np.concatenate([np.ones(numerator_zeros.size), -np.ones(pole_atoms.size)])
    centers, inverse = np.unique(singular, return_inverse=True)
    summed = np.zeros(centers.size)
    np.add.at(summed, inverse.reshape(-1), orders)
    keep = summed != 0
    if total == 0:
        raise ZeroAtEvaluationPoint("L vanishes identically")
    return LogModulusForm(math.log(abs(total)), centers[keep], summed[keep])


def _patch(order, smooth, delta):
    """Exact integral of (order*log|w| + smooth)^2 over |w| < delta."""
    log_delta = math.log(delta)
    area = math.pi * delta * delta
    i1 = area * (log_delta - 0.5)
    i2 = area * (log_delta * log_delta - log_delta + 0.5)
    return order * order * i2 + 2 * order * smooth * i1 + smooth * smooth * area


def log_squared_integral(form: LogModulusForm, r: float, quad: QuadratureSpec) -> float:
    """Integral of log^2|L| over the disk of radius r with singularities excised and patched."""
    if not r > 0:
        raise ValidationError("radius must be positive")
    delta = quad.excision if quad.excision is not None else get_config("EXCISION_FRACTION") * r
    points, weights = quad.nodes(r)
    inside = np.flatnonzero(np.abs(form.centers) < r)
    keep = np.ones(points.size, dtype=bool)
    patches = 0.0
    if inside.size:
        centers = form.centers[inside]
        tree = cKDTree(np.column_stack([centers.real, centers.imag]))
        if inside.size > 1:
            distance, _ = tree.query(np.column_stack([centers.real, centers.imag]), k=2)
            overlap = float(np.mean(distance[:, 1] < 2 * delta))
            if overlap > get_config("MAX_EXCISION_OVERLAP"):
                raise QuadratureFailure(
                    f"{overlap:.0%} of the excision disks overlap at delta={delta:g}"
                )
        distance, _ = tree.query(
            np.column_stack([points.real, points.imag]), distance_upper_bound=delta
        )
        keep = ~np.isfinite(distance)
        for index in inside.tolist():
            patches += _patch(form.orders[index], form.smooth_part(index), delta)
    values = form(points[keep])
    finite = np.isfinite(values)
    if not np.all(finite):
        logger.warning("dropping %d quadrature nodes on a singularity", int(np.sum(~finite)))
    return float(np.dot(weights[keep][finite], values[finite] ** 2)) + patches


def a3_value(L: RationalSum, r: float, quad: Optional[QuadratureSpec] = None) -> float:
    """(1/n^2) times the integral of log^2|L| over D_r, n = number of poles."""
    quad = quad or QuadratureSpec()
    n = len(L)
    return log_squared_integral(log_modulus_form(L), r, quad) / (n * n)


def a3_integral(spec: EnsembleSpec, r: float, n: int, quad: Optional[QuadratureSpec] = None, seed=0) -> float:
    if not r > 0:
        raise InvalidSpec("r must be positive")
    return a3_value(rational_sum_for(spec, n, validate_seed(seed)), r, quad)


def a3_probe(spec, r, n_values, quad=None, trials=1, seed=0) -> ProbeResult:
    """a3_integral over an n ladder; the estimate is the trial mean."""
    ladder = _check_ladder(n_values)
    trials = _check_trials(trials)
    seed = validate_seed(seed)
    estimates, errors = [], []
    for n in ladder:
        values = np.array(
            [a3_integral(spec, r, n, quad, derive_seed(seed, t)) for t in range(trials)]
        )
        estimates.append(values.mean())
        errors.append(values.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0)
    return ProbeResult(
        ladder, estimates, errors, trials, seed, label="a3",
        parameters={"r": r, "ensemble": spec.to_dict()},
    )


# -- Poisson-Jensen --------------------------------------------------------------


def _merged_sum(L):
    poles, inverse = np.unique(np.asarray(L.poles), return_inverse=True)
    weights = np.zeros(poles.size, dtype=complex)
    np.add.at(weights, inverse.reshape(-1), np.asarray(L.weights))
    keep = weights != 0
    return RationalSum(weights[keep], poles[keep])


def rational_zero_set(L: RationalSum) -> np.ndarray:
    """Zeros of L: expand the numerator at small n, solve in root form otherwise."""
    merged = _merged_sum(L)
    if len(merged) <= get_config("EXPAND_MAX_DEGREE"):
        numerator = numerator_polynomial(merged)
        if numerator.degree < 1:
            return np.zeros(0, dtype=complex)
        return np.asarray(aberth_roots(numerator).roots.atoms)
    return np.asarray(rational_zeros(merged).roots.atoms)


def _blaschke_log(points, z, R):
    """sum over points a of log|(R^2 - conj(a) z) / (R (z - a))|."""
    return float(np.sum(np.log(np.abs((R * R - np.conj(points) * z) / (R * (z - points))))))


def poisson_jensen_residual(L: RationalSum, R: float, z, quad_points: int = 4096) -> float:
    """|log|L(z)| - (Poisson boundary integral + zero and pole corrections)|."""
    z = complex(z)
    if not R > 0 or abs(z) >= R:
        raise ValidationError("need 0 <= |z| < R")
    merged = _merged_sum(L)
    try:
        value = eval_rational(merged, z).s1
    except PoleHit as exc:
        raise ZeroAtEvaluationPoint(f"z={z} is a pole of L") from exc
    if value == 0:
        raise ZeroAtEvaluationPoint(f"z={z} is a zero of L")
    zeros = rational_zero_set(merged)
    poles = np.asarray(merged.poles)
    for label, points in (("zero", zeros), ("pole", poles)):
        if points.size and np.min(np.abs(np.abs(points) - R)) < 1e-6:
            raise SingularityOnCircle(f"a {label} of L lies within 1e-6 of |w| = {R}")
    theta = 2 * np.pi * np.arange(quad_points) / quad_points
    boundary = R * np.exp(1j * theta)
    s1, _, _, _ = rational_sums(merged.weights, merged.poles, boundary)
    kernel = ((boundary + z) / (boundary - z)).real
    integral = float(np.mean(kernel * np.log(np.abs(s1))))
    inner_zeros = zeros[np.abs(zeros) < R]
    inner_poles = poles[np.abs(poles) < R]
    predicted = integral - _blaschke_log(inner_zeros, z, R) + _blaschke_log(inner_poles, z, R)
    return abs(math.log(abs(value)) - predicted)


# -- concentration -----------------------------------------------------------------


def _tree_and_points(samples):
    samples = np.asarray(samples, dtype=complex).reshape(-1)
    plane = np.column_stack([samples.real, samples.imag])
    return samples, plane, cKDTree(plane)


def concentration_estimate(samples, delta: float) -> float:
    """
    Empirical Q(X, delta): the largest fraction of samples inside one closed
    ball of radius delta, over centres at the samples and at midpoints of
    pairs at most 2 delta apart.
    """
    if not delta > 0:
        raise ValidationError("delta must be positive")
    samples, plane, tree = _tree_and_points(samples)
    if samples.size < 2:
        raise ValidationError("concentration_estimate needs at least two samples")
    pairs = tree.query_pairs(2 * delta, output_type="ndarray")
    centers = plane
    if pairs.size:
        centers = np.vstack([plane, 0.5 * (plane[pairs[:, 0]] + plane[pairs[:, 1]])])
    best = 0
    rows = max(1, get_config("CHUNK_ENTRIES") // samples.size)
    for start in range(0, len(centers), rows):
        counts = tree.query_ball_point(centers[start : start + rows], delta, return_length=True)
        best = max(best, int(np.max(counts)))
    return best / samples.size


def concentration_upper_bound(samples, delta: float, h: Optional[float] = None) -> float:
    """
    Certified upper bound on the empirical Q(X, delta): every ball of radius
    delta sits inside a ball of radius delta + h/sqrt(2) around a node of a
    grid of spacing h.
    """
    if not delta > 0:
        raise ValidationError("delta must be positive")
    samples, plane, tree = _tree_and_points(samples)
    h = 0.5 * delta if h is None else float(h)
    low = plane.min(axis=0) - delta
    high = plane.max(axis=0) + delta
    xs = np.arange(low[0], high[0] + h, h)
    ys = np.arange(low[1], high[1] + h, h)
    if xs.size * ys.size > get_config("CHUNK_ENTRIES"):
        raise TooLarge("certification grid is too fine for the sample spread")
    grid = np.column_stack([g.reshape(-1) for g in np.meshgrid(xs, ys)])
    counts = tree.query_ball_point(grid, delta + h / math.sqrt(2), return_length=True)
    return int(np.max(counts)) / samples.size


def concentration_probe(spec: EnsembleSpec, z, eps: float, n_values, trials: int, seed) -> ProbeResult:
    """Q(L_n(z), e^{-n eps}) estimated from ``trials`` draws of L_n(z) per n."""
    if not eps > 0:
        raise InvalidSpec("eps must be positive")
    ladder = _check_ladder(n_values)
    trials = _check_trials(trials)
    if trials < 2:
        raise InvalidSpec("concentration_probe needs at least two trials")
    seed = validate_seed(seed)
    estimates = []
    for n in ladder:
        values = [
            eval_rational(rational_sum_for(spec, n, derive_seed(seed, t)), z).s1
            for t in range(trials)
        ]
        estimates.append(concentration_estimate(values, math.exp(-n * eps)))
    return ProbeResult(
        ladder, estimates, [_binomial_stderr(q, trials) for q in estimates], trials, seed,
        label="concentration", parameters={"z": complex(z), "eps": eps, "ensemble": spec.to_dict()},
    )


# -- Cauchy likelihood ------------------------------------------------------------------


def real_fraction(critical: RootSet, im_tol: float = 1e-8) -> float:
    atoms = np.asarray(critical.atoms)
    if atoms.size == 0:
        return 0.0
    return float(np.mean(np.abs(atoms.imag) <= im_tol * (1.0 + np.abs(atoms))))


def real_critical_fraction(n, trials: int, seed, im_tol: float = 1e-8) -> ProbeResult:
    """
    Median over trials of the fraction of real critical points of
    prod (z - X_k - i)(z - X_k + i) with standard Cauchy X_k.
    """
    if not im_tol > 0:
        raise InvalidSpec("im_tol must be positive")
    ladder = _check_ladder([n] if np.ndim(n) == 0 else n)
    trials = _check_trials(trials)
    seed = validate_seed(seed)
    spec = EnsembleSpec(EnsembleKind.CAUCHY_PAIRS)
    medians, errors = [], []
    for size in ladder:
        fractions = np.array(
            [
                real_fraction(critical_points(generate(spec, size, derive_seed(seed, t))).roots, im_tol)
                for t in range(trials)
            ]
        )
        medians.append(float(np.median(fractions)))
        # asymptotic standard error of a sample median
        spread = fractions.std(ddof=1) if trials > 1 else 0.0
        errors.append(1.2533 * spread / math.sqrt(trials))
    return ProbeResult(
        ladder, medians, errors, trials, seed, label="real_fraction",
        parameters={"im_tol": im_tol},
    )


# -- mixtures ------------------------------------------------------------------------


def mixture_limit_probe(a_spec: EnsembleSpec, b_spec: EnsembleSpec, p: float, n: int, seed, reference_size=None, transport=None) -> float:
    """
    Distance from the empirical measure of xi_k (a_k with probability p,
    else b_k) to the p-mixture of the two reference measures.
    """
    if not 0 <= p <= 1:
        raise InvalidSpec("p must lie in [0, 1]")
    for spec in (a_spec, b_spec):
        if spec.kind == EnsembleKind.GENERALIZED_DERIVATIVE:
            raise InvalidSpec("mixture components must generate zeros")
    seed = validate_seed(seed)
    a = generate(a_spec, n, derive_seed(seed, 1)).atoms
    b = generate(b_spec, n, derive_seed(seed, 2)).atoms
    if a.size != b.size:
        raise InvalidSpec("mixture components must produce the same number of atoms")
    pick_a = stream(seed, STREAM_CHOICE).random(a.size) < p
    sample = EmpiricalMeasure.from_atoms(np.where(pick_a, a, b))
    size = reference_size or get_config("REFERENCE_FACTOR") * n
    reference = EmpiricalMeasure.mixture(
        EmpiricalMeasure.from_rootset(reference_rootset(a_spec, size, derive_seed(seed, 3))),
        EmpiricalMeasure.from_rootset(reference_rootset(b_spec, size, derive_seed(seed, 4))),
        p,
    )
    if transport is None:
        transport = TransportInterface()
    return transport.distance(sample, reference)
