"""
Zeros of polynomials and critical points from root form.

``aberth_roots`` works on coefficients; ``critical_points`` and
``rational_zeros`` never expand a product and evaluate everything through
the sums S1 = sum w/(z - c) and S2 = sum w/(z - c)^2 instead.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, maximum_bipartite_matching
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial.distance import cdist

from .conf import get_config
from .exceptions import (
    DegreeTooLarge,
    DidNotConverge,
    InvalidPolynomial,
    SizeMismatch,
    TooLarge,
)
from .polycore import EPS, Polynomial, RationalSum, RootSet, rational_sums

logger = logging.getLogger(__name__)

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True, eq=False)
class RootFindReport:
    """Return type for every root solve."""

    roots: RootSet
    iterations: int
    max_residual: float
    converged: np.ndarray
    residuals: np.ndarray
    method: str = "aberth"

    def __post_init__(self):
        for name in ("converged", "residuals"):
            array = np.array(getattr(self, name)).reshape(-1)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))

    def __len__(self):
        return len(self.roots)


def _settings(tol, max_iter, raise_on_failure):
    if tol is None:
        tol = get_config("ABERTH_TOL")
    if max_iter is None:
        max_iter = get_config("ABERTH_MAX_ITER")
    if raise_on_failure is None:
        raise_on_failure = get_config("STRICT_CONVERGENCE")
    return tol, max_iter, raise_on_failure


def _assemble(parts, iterations, method):
    roots = np.concatenate([np.asarray(p[0], dtype=complex) for p in parts])
    converged = np.concatenate([np.asarray(p[1], dtype=bool) for p in parts])
    residuals = np.concatenate([np.asarray(p[2], dtype=float) for p in parts])
    return RootFindReport(
        roots=RootSet(roots),
        iterations=iterations,
        max_residual=float(residuals.max()) if residuals.size else 0.0,
        converged=converged,
        residuals=residuals,
        method=method,
    )


def _check(report, raise_on_failure, what):
    if raise_on_failure and not report.all_converged:
        missing = int(np.count_nonzero(~report.converged))
        raise DidNotConverge(
            f"{what}: {missing} of {len(report)} roots did not converge "
            f"after {report.iterations} iterations",
            report=report,
        )
    return report


# -- Aberth-Ehrlich kernel -----------------------------------------------------


def _repulsion(active_points, all_points, active_index):
    """sum_{k != j} 1 / (z_j - z_k) for every active approximation j."""
    out = np.empty(active_points.size, dtype=complex)
    rows = max(1, get_config("CHUNK_ENTRIES") // max(1, all_points.size))
    with np.errstate(divide="ignore", invalid="ignore"):
        for start in range(0, active_points.size, rows):
            block = active_points[start : start + rows]
            diff = block[:, None] - all_points[None, :]
            own = active_index[start : start + rows]
            diff[np.arange(block.size), own] = np.inf
            diff[diff == 0] = np.inf
            out[start : start + rows] = (1.0 / diff).sum(axis=1)
    return out


def _aberth(newton, start, tol, max_iter, residual_limit):
    """
    Jacobi-style Aberth sweeps. ``newton(z)`` returns the Newton ratio and
    the relative residual at each point. A root stops when its correction is
    below tol*(1+|z|) or when its residual drops under ``residual_limit``,
    the rounding level of the evaluation.
    """
    z = np.array(start, dtype=complex)
    converged = np.zeros(z.size, dtype=bool)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        active = np.flatnonzero(~converged)
        if active.size == 0:
            iterations -= 1
            break
        points = z[active]
        ratio, residual = newton(points)
        bad = ~np.isfinite(ratio)
        if np.any(bad):
            ratio[bad] = 1e-6 * (1.0 + np.abs(points[bad]))
        settled = residual <= residual_limit
        with np.errstate(divide="ignore", invalid="ignore"):
            denominator = 1.0 - ratio * _repulsion(points, z, active)
            step = np.where(denominator != 0, ratio / denominator, ratio)
        step[~np.isfinite(step)] = ratio[~np.isfinite(step)]
        step[settled] = 0.0
        z[active] = points - step
        small = np.abs(step) <= tol * (1.0 + np.abs(points))
        converged[active] = settled | small
    _, residual = newton(z)
    return z, converged, residual, iterations


def _horner(coeffs, z):
    value = np.full(z.shape, coeffs[-1], dtype=complex)
    slope = np.zeros(z.shape, dtype=complex)
    bound = np.full(z.shape, abs(coeffs[-1]))
    absz = np.abs(z)
    for a in coeffs[-2::-1]:
        slope = slope * z + value
        value = value * z + a
        bound = bound * absz + abs(a)
    return value, slope, bound


def _coefficient_newton(coeffs):
    degree = len(coeffs) - 1
    reversed_coeffs = coeffs[::-1]

    def newton(z):
        ratio = np.empty(z.size, dtype=complex)
        residual = np.empty(z.size)
        inside = np.abs(z) <= 1.0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if np.any(inside):
                value, slope, bound = _horner(coeffs, z[inside])
                ratio[inside] = value / slope
                residual[inside] = np.abs(value) / bound
            outside = ~inside
            if np.any(outside):
                zo = z[outside]
                w = 1.0 / zo
                value, slope, bound = _horner(reversed_coeffs, w)
                ratio[outside] = zo * value / (degree * value - w * slope)
                residual[outside] = np.abs(value) / bound
        return ratio, residual

    return newton


def _upper_hull(xs, ys):
    hull = []
    for x, y in zip(xs, ys):
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            if (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0) >= 0:
                hull.pop()
            else:
                break
        hull.append((x, y))
    return hull


def _initial_circles(coeffs):
    """Bini's starting points: circles read off the Newton polygon of |a_k|."""
    degree = len(coeffs) - 1
    magnitudes = np.abs(coeffs)
    support = np.flatnonzero(magnitudes > 0)
    hull = _upper_hull(support.tolist(), np.log(magnitudes[support]).tolist())
    points = []
    for (i, log_i), (j, log_j) in zip(hull[:-1], hull[1:]):
        count = j - i
        radius = math.exp((log_i - log_j) / count)
        angles = 2 * math.pi * np.arange(count) / count + 2 * math.pi * i / degree
        points.append(radius * np.exp(1j * (angles + 0.4)))
    return np.concatenate(points)


def _solve_dense(coeffs, tol, max_iter):
    degree = len(coeffs) - 1
    if degree == 1:
        return np.array([-coeffs[0] / coeffs[1]]), np.ones(1, bool), np.zeros(1), 0
    limit = 4 * degree * EPS
    return _aberth(
        _coefficient_newton(coeffs), _initial_circles(coeffs), tol, max_iter, limit
    )


def _exponent_stride(coeffs):
    exponents = np.flatnonzero(coeffs)
    stride = 0
    for k in exponents.tolist():
        stride = math.gcd(stride, k)
    return max(stride, 1)


def _principal_roots(values, order):
    """All ``order``-th roots of each value, zero mapping to zero."""
    radius = np.abs(values) ** (1.0 / order)
    theta = np.angle(values)
    turns = 2 * math.pi * np.arange(order)
    return (radius[:, None] * np.exp(1j * (theta[:, None] + turns[None, :]) / order)).reshape(-1)


def aberth_roots(p: Polynomial, tol=None, max_iter=None, raise_on_failure=None):
    """
    All zeros of ``p`` by simultaneous Aberth-Ehrlich iteration.

    Zero roots are split off exactly and a polynomial in z^g is solved in
    w = z^g first, so lacunary inputs such as z^n - 1 come out exact.
    """
    tol, max_iter, raise_on_failure = _settings(tol, max_iter, raise_on_failure)
    if p.is_zero or p.degree < 1:
        raise InvalidPolynomial("aberth_roots needs a polynomial of degree >= 1")

    coeffs = np.array(p.coeffs)
    zero_roots = int(np.flatnonzero(coeffs)[0])
    reduced = coeffs[zero_roots:]
    parts = [(np.zeros(zero_roots, complex), np.ones(zero_roots, bool), np.zeros(zero_roots))]
    iterations = 0
    if len(reduced) > 1:
        stride = _exponent_stride(reduced)
        roots, converged, residual, iterations = _solve_dense(
            reduced[::stride], tol, max_iter
        )
        if stride > 1:
            roots = _principal_roots(roots, stride)
            converged = np.repeat(converged, stride)
            residual = np.repeat(residual, stride)
        parts.append((roots, converged, residual))
    report = _assemble(parts, iterations, "aberth")
    logger.debug(
        "aberth_roots degree=%d iterations=%d max_residual=%.3g",
        p.degree,
        iterations,
        report.max_residual,
    )
    return _check(report, raise_on_failure, "aberth_roots")


def companion_roots(p: Polynomial) -> RootSet:
    """Eigenvalues of the companion matrix; an independent oracle for tests."""
    if p.is_zero or p.degree < 1:
        raise InvalidPolynomial("companion_roots needs a polynomial of degree >= 1")
    limit = get_config("COMPANION_MAX_DEGREE")
    if p.degree > limit:
        raise DegreeTooLarge(f"degree {p.degree} exceeds the companion limit {limit}")
    coeffs = np.array(p.coeffs)
    zero_roots = int(np.flatnonzero(coeffs)[0])
    reduced = coeffs[zero_roots:]
    degree = len(reduced) - 1
    roots = [np.zeros(zero_roots, dtype=complex)]
    if degree >= 1:
        monic = reduced[:-1] / reduced[-1]
        companion = np.zeros((degree, degree), dtype=complex)
        companion[1:, :-1] = np.eye(degree - 1)
        companion[:, -1] = -monic
        roots.append(linalg.eigvals(companion))
    return RootSet(np.concatenate(roots))


# -- matching -----------------------------------------------------------------


def _as_plane(values):
    values = np.asarray(values, dtype=complex).reshape(-1)
    return np.column_stack([values.real, values.imag])


def _has_perfect_matching(mask):
    matching = maximum_bipartite_matching(csr_matrix(mask), perm_type="column")
    return bool(np.all(matching >= 0))


def match_rootsets(A: RootSet, B: RootSet) -> float:
    """Bottleneck distance: min over bijections of the largest paired distance."""
    if len(A) != len(B):
        raise SizeMismatch(f"cannot match {len(A)} atoms against {len(B)}")
    limit = get_config("MATCH_MAX_SIZE")
    if len(A) > limit:
        raise TooLarge(f"matching is limited to {limit} atoms")
    if len(A) == 0:
        return 0.0
    distances = cdist(_as_plane(A.atoms), _as_plane(B.atoms))
    floor = max(distances.min(axis=1).max(), distances.min(axis=0).max())
    candidates = np.unique(distances[distances >= floor])
    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(distances <= candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


# -- critical points -------------------------------------------------------------


def merge_multiple_zeros(atoms, tol=None):
    """
    Group atoms closer than tol*(1 + max|z|) into single centres.

    Returns (centres, multiplicities). Each centre is the first atom of its
    group, so exact duplicates map back to an atom bit for bit.
    """
    atoms = np.asarray(atoms, dtype=complex).reshape(-1)
    if tol is None:
        tol = get_config("MERGE_TOL")
    if atoms.size == 0:
        return atoms, np.zeros(0, dtype=int)
    radius = tol * (1.0 + float(np.abs(atoms).max()))
    pairs = cKDTree(_as_plane(atoms)).query_pairs(radius, output_type="ndarray")
    if pairs.size == 0:
        return atoms.copy(), np.ones(atoms.size, dtype=int)
    graph = csr_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(atoms.size,) * 2
    )
    _, labels = connected_components(graph, directed=False)
    _, first, counts = np.unique(labels, return_index=True, return_counts=True)
    order = np.argsort(first)
    return atoms[first[order]], counts[order]


def _divisors_descending(n):
    small = [d for d in range(1, int(math.isqrt(n)) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]), reverse=True)


def rotational_order(atoms, center, tol=None):
    """
    Largest g such that the atoms are invariant under rotation by 2*pi/g
    about ``center``; 1 when there is no such symmetry.
    """
    if tol is None:
        tol = get_config("SYMMETRY_TOL")
    shifted = np.asarray(atoms, dtype=complex) - center
    radii = np.abs(shifted)
    if shifted.size < 2:
        return 1
    scale = float(radii.max())
    radius = tol * (1.0 + scale)
    if float(radii.min()) <= radius:
        return 1
    tree = cKDTree(_as_plane(shifted))
    for order in _divisors_descending(shifted.size):
        if order == 1:
            break
        rotated = shifted * np.exp(2j * math.pi / order)
        distance, _ = tree.query(_as_plane(rotated[:8]))
        if np.any(distance > radius):
            continue
        distance, index = tree.query(_as_plane(rotated))
        if np.all(distance <= radius) and np.unique(index).size == shifted.size:
            return order
    return 1


def _pole_free_guesses(centers, count):
    """Midpoints of angularly consecutive zeros, nudged off exact coincidences."""
    origin = centers.mean()
    offsets = centers - origin
    order = np.lexsort((np.abs(offsets), np.angle(offsets)))
    ring = centers[order]
    guesses = 0.5 * (ring + np.roll(ring, -1))[:count]
    scale = max(float(np.abs(offsets).max()), 1.0)
    guesses = guesses + 1e-8 * scale * np.exp(1j * GOLDEN_ANGLE * np.arange(count))
    if np.unique(guesses).size < count:
        turns = 2 * math.pi * (np.arange(count) + 0.5) / count
        guesses = origin + 0.5 * scale * np.exp(1j * turns)
    return guesses


def _root_form_zeros(centers, weights, tol, max_iter):
    """
    Zeros of R(z) = sum_i w_i prod_{j != i}(z - c_i) for distinct centres,
    using only root-form evaluations: R'/R = T - S2/S1, so the Newton ratio
    is S1 / (T*S1 - S2).
    """
    d = centers.size
    total = complex(weights.sum())
    count = d - 1 if abs(total) > 1e-14 * float(np.abs(weights).sum()) else d - 2
    if count <= 0:
        return np.zeros(0, complex), np.zeros(0, bool), np.zeros(0), 0
    if d == 2 and count == 1:
        root = (weights[0] * centers[1] + weights[1] * centers[0]) / total
        return np.array([root]), np.ones(1, bool), np.zeros(1), 0

    def newton(z):
        s1, s2, t, magnitude = rational_sums(weights, centers, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = s1 / (t * s1 - s2)
            residual = np.abs(s1) / magnitude
        residual[~np.isfinite(residual)] = np.inf
        return ratio, residual

    limit = 4 * (math.ceil(math.log2(d)) + 2) * EPS
    return _aberth(newton, _pole_free_guesses(centers, count), tol, max_iter, limit)


def _symmetric_critical_points(centers, tol, max_iter, depth):
    """
    Zeros invariant under rotation by 2*pi/g about their centroid c satisfy
    P(z) = Q((z - c)^g), so P' has g - 1 zeros at c and the rest are g-th
    roots of the critical points of Q.

    Q is solved on the unit scale: its zeros are ((z - c) / s)^g with s the
    largest |z - c|, which keeps every reduced zero in the closed unit disk.
    Returns None when the reduction does not apply, so the caller falls back
    to the plain root-form solve.
    """
    center = complex(centers.mean())
    order = rotational_order(centers, center)
    if order < 2:
        return None
    shifted = centers - center
    scale = float(np.abs(shifted).max())
    powered = (np.abs(shifted) / scale) ** order * np.exp(1j * order * np.angle(shifted))
    if not np.all(np.isfinite(powered)):
        return None
    reduced, counts = merge_multiple_zeros(powered, tol=get_config("SYMMETRY_TOL"))
    if np.any(counts != order):
        return None
    logger.debug("rotational symmetry of order %d about %s", order, center)
    parts = [(np.full(order - 1, center), np.ones(order - 1, bool), np.zeros(order - 1))]
    iterations = 0
    if reduced.size >= 2:
        inner = _critical_parts(reduced, tol, max_iter, depth + 1)
        iterations = inner.iterations
        parts.append(
            (
                scale * _principal_roots(inner.roots.atoms, order) + center,
                np.repeat(inner.converged, order),
                np.repeat(inner.residuals, order),
            )
        )
    return _assemble(parts, iterations, "symmetry")


def _critical_parts(atoms, tol, max_iter, depth=0):
    centers, multiplicity = merge_multiple_zeros(atoms)
    if centers.size == 1:
        n = int(multiplicity[0])
        return _assemble(
            [(np.full(n - 1, centers[0]), np.ones(n - 1, bool), np.zeros(n - 1))],
            0,
            "multiplicity",
        )
    if np.all(multiplicity == 1) and depth < 8:
        report = _symmetric_critical_points(centers, tol, max_iter, depth)
        if report is not None:
            return report
    forced = np.repeat(centers, multiplicity - 1)
    roots, converged, residual, iterations = _root_form_zeros(
        centers, multiplicity.astype(complex), tol, max_iter
    )
    return _assemble(
        [
            (forced, np.ones(forced.size, bool), np.zeros(forced.size)),
            (roots, converged, residual),
        ],
        iterations,
        "root-form",
    )


def critical_points(zeros: RootSet, tol=None, max_iter=None, raise_on_failure=None):
    """
    The n - 1 critical points of P = prod (z - zeros), computed from root form.

    A zero of multiplicity m contributes m - 1 atoms exactly at that zero;
    the remaining critical points solve S1(z) = 0.
    """
    tol, max_iter, raise_on_failure = _settings(tol, max_iter, raise_on_failure)
    if len(zeros) < 2:
        raise InvalidPolynomial("critical_points needs at least two zeros")
    report = _critical_parts(np.asarray(zeros.atoms), tol, max_iter)
    logger.debug(
        "critical_points n=%d method=%s iterations=%d",
        len(zeros),
        report.method,
        report.iterations,
    )
    return _check(report, raise_on_failure, "critical_points")


def rational_zeros(L: RationalSum, tol=None, max_iter=None, raise_on_failure=None):
    """Zeros of L(z) = sum a_k/(z - z_k); repeated poles have their weights added."""
    tol, max_iter, raise_on_failure = _settings(tol, max_iter, raise_on_failure)
    poles, inverse = np.unique(np.asarray(L.poles), return_inverse=True)
    weights = np.zeros(poles.size, dtype=complex)
    np.add.at(weights, inverse.reshape(-1), np.asarray(L.weights))
    keep = weights != 0
    poles, weights = poles[keep], weights[keep]
    if poles.size < 2:
        return _assemble([(np.zeros(0, complex), np.zeros(0, bool), np.zeros(0))], 0, "root-form")
    roots, converged, residual, iterations = _root_form_zeros(
        poles, weights, tol, max_iter
    )
    report = _assemble([(roots, converged, residual)], iterations, "root-form")
    return _check(report, raise_on_failure, "rational_zeros")


# -- structural checks ----------------------------------------------------------


def gauss_lucas_violations(zeros: RootSet, critical: RootSet, tol=1e-8):
    """Indices of critical points outside the zero hull dilated by ``tol``."""
    points = _as_plane(zeros.atoms)
    probes = _as_plane(critical.atoms)
    if probes.size == 0:
        return np.zeros(0, dtype=int)
    centred = points - points.mean(axis=0)
    singular = np.linalg.svd(centred, compute_uv=False) if len(points) > 1 else np.zeros(2)
    if len(points) >= 3 and singular[1] > 1e-12 * max(singular[0], 1e-300):
        try:
            hull = ConvexHull(points)
            excess = probes @ hull.equations[:, :2].T + hull.equations[:, 2]
            return np.flatnonzero(excess.max(axis=1) > tol)
        except (RuntimeError, ValueError):
            logger.debug("convex hull degenerate, using segment test")
    origin = points.mean(axis=0)
    if singular[0] == 0:
        return np.flatnonzero(np.hypot(*(probes - origin).T) > tol)
    _, _, vt = np.linalg.svd(centred)
    direction = vt[0]
    along = (points - origin) @ direction
    probe_along = (probes - origin) @ direction
    across = np.abs((probes - origin) @ np.array([-direction[1], direction[0]]))
    outside = (
        (across > tol)
        | (probe_along < along.min() - tol)
        | (probe_along > along.max() + tol)
    )
    return np.flatnonzero(outside)


def vieta_mean_gap(zeros: RootSet, critical: RootSet) -> float:
    """|mean(critical) - mean(zeros)| relative to the mean modulus of the zeros."""
    gap = abs(critical.atoms.mean() - zeros.atoms.mean())
    return gap / max(float(np.abs(zeros.atoms).mean()), 1e-300)
