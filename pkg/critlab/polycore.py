"""
Complex polynomial and rational-sum arithmetic.

A polynomial lives in one of two interchangeable forms: dense ascending
coefficients (``Polynomial``) or the multiset of its zeros (``RootSet``).
``RationalSum`` holds L(z) = sum a_k / (z - z_k). All values are immutable and
every function here is pure, so they can be shared between workers freely.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .conf import get_config
from .exceptions import PoleHit, SizeMismatch

EPS = float(np.finfo(float).eps)
_SPLITTER = 134217729.0  # 2**27 + 1, Veltkamp split constant


def _frozen_array(values, dtype=complex):
    array = np.array(values, dtype=dtype).reshape(-1)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Dense polynomial, coefficients in ascending powers."""

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex).reshape(-1)
        nonzero = np.flatnonzero(coeffs)
        if nonzero.size:
            coeffs = coeffs[: nonzero[-1] + 1]
        else:
            coeffs = np.zeros(1, dtype=complex)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def __call__(self, z):
        return evaluate(self, z).value

    def __repr__(self):
        return f"Polynomial(degree={self.degree})"


@dataclass(frozen=True, eq=False)
class RootSet:
    """Finite multiset of complex atoms; multiplicity is repetition."""

    atoms: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "atoms", _frozen_array(self.atoms))

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms.tolist())

    def conjugate(self) -> "RootSet":
        return RootSet(np.conj(self.atoms))

    def __repr__(self):
        return f"RootSet(size={len(self)})"


@dataclass(frozen=True, eq=False)
class RationalSum:
    """L(z) = sum_k weights[k] / (z - poles[k])."""

    weights: np.ndarray
    poles: np.ndarray
    distinct_poles: bool = field(init=False)

    def __post_init__(self):
        weights = _frozen_array(self.weights)
        poles = _frozen_array(self.poles)
        if weights.shape != poles.shape:
            raise SizeMismatch(
                f"{len(weights)} weights given for {len(poles)} poles"
            )
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(
            self, "distinct_poles", np.unique(poles).size == poles.size
        )

    @classmethod
    def logarithmic_derivative(cls, roots: RootSet) -> "RationalSum":
        """P'/P for P with the given zeros: every weight is one."""
        return cls(np.ones(len(roots), dtype=complex), roots.atoms)

    def __len__(self):
        return len(self.poles)

    @property
    def total_weight(self) -> complex:
        return complex(pairwise_sum(self.weights))

    def __repr__(self):
        return f"RationalSum(size={len(self)}, distinct_poles={self.distinct_poles})"


@dataclass(frozen=True)
class HornerResult:
    value: complex
    condition: float
    error_bound: float


@dataclass(frozen=True)
class RationalEval:
    s1: complex
    s2: complex

    @property
    def value(self) -> complex:
        return self.s1


# -- error-free transformations -------------------------------------------


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLITTER * a
    high = c - (c - a)
    return high, a - high


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def _cmul_eft(ar, ai, br, bi):
    """Complex product with the rounding error of each component."""
    p1, e1 = _two_prod(ar, br)
    p2, e2 = _two_prod(ai, bi)
    p3, e3 = _two_prod(ar, bi)
    p4, e4 = _two_prod(ai, br)
    real, e5 = _two_sum(p1, -p2)
    imag, e6 = _two_sum(p3, p4)
    return real, imag, (e1 - e2) + e5, (e3 + e4) + e6


# -- summation --------------------------------------------------------------


def pairwise_sum(values, axis=-1):
    """Tree summation along ``axis``; error grows like log2(n) instead of n."""
    array = np.moveaxis(np.asarray(values), axis, -1)
    if array.shape[-1] == 0:
        return np.zeros(array.shape[:-1], dtype=array.dtype)[()]
    while array.shape[-1] > 1:
        if array.shape[-1] % 2:
            pad = np.zeros(array.shape[:-1] + (1,), dtype=array.dtype)
            array = np.concatenate([array, pad], axis=-1)
        array = array[..., 0::2] + array[..., 1::2]
    return array[..., 0][()]


# -- construction -------------------------------------------------------------


def poly_from_roots(roots: RootSet, compensated=None) -> Polynomial:
    """
    Monic polynomial with the given zeros, by multiplying in one linear
    factor at a time. Degrees above COMPENSATED_DEGREE switch to double-double
    accumulation unless ``compensated`` says otherwise.
    """
    atoms = roots.atoms
    if compensated is None:
        compensated = len(atoms) > get_config("COMPENSATED_DEGREE")
    if compensated:
        return Polynomial(_expand_compensated(atoms))

    coeffs = np.zeros(len(atoms) + 1, dtype=complex)
    coeffs[0] = 1.0
    for k, root in enumerate(atoms.tolist()):
        shifted = np.concatenate(([0.0], coeffs[: k + 1]))
        coeffs[: k + 2] = shifted - root * coeffs[: k + 2]
    return Polynomial(coeffs)


def _expand_compensated(atoms):
    n = len(atoms)
    hi_r = np.zeros(n + 1)
    hi_i = np.zeros(n + 1)
    lo_r = np.zeros(n + 1)
    lo_i = np.zeros(n + 1)
    hi_r[0] = 1.0
    for k, root in enumerate(atoms.tolist()):
        m = k + 2
        xr, xi = root.real, root.imag
        sh_r = np.concatenate(([0.0], hi_r[: k + 1]))
        sh_i = np.concatenate(([0.0], hi_i[: k + 1]))
        pr, pi, epr, epi = _cmul_eft(hi_r[:m], hi_i[:m], xr, xi)
        sr, esr = _two_sum(sh_r, -pr)
        si, esi = _two_sum(sh_i, -pi)
        sl_r = np.concatenate(([0.0], lo_r[: k + 1]))
        sl_i = np.concatenate(([0.0], lo_i[: k + 1]))
        new_lo_r = sl_r - (lo_r[:m] * xr - lo_i[:m] * xi) + (esr - epr)
        new_lo_i = sl_i - (lo_r[:m] * xi + lo_i[:m] * xr) + (esi - epi)
        hi_r[:m], lo_r[:m] = _two_sum(sr, new_lo_r)
        hi_i[:m], lo_i[:m] = _two_sum(si, new_lo_i)
    return (hi_r + lo_r) + 1j * (hi_i + lo_i)


def derivative(p: Polynomial) -> Polynomial:
    if p.degree == 0:
        return Polynomial([0.0])
    return Polynomial(p.coeffs[1:] * np.arange(1, p.degree + 1))


def numerator_polynomial(L: RationalSum) -> Polynomial:
    """
    N(z) = sum_k a_k prod_{j != k} (z - z_j), the common-denominator
    numerator of L. Every deflation P/(z - z_k) runs at once, vectorized
    over k.
    """
    n = len(L)
    if n == 0:
        return Polynomial([0.0])
    full = poly_from_roots(RootSet(L.poles)).coeffs
    poles = L.poles
    weights = L.weights
    out = np.zeros(n, dtype=complex)
    quotient = np.full(n, full[n], dtype=complex)
    out[n - 1] = pairwise_sum(weights * quotient)
    for j in range(n - 1, 0, -1):
        quotient = full[j] + poles * quotient
        out[j - 1] = pairwise_sum(weights * quotient)
    return Polynomial(out)


# -- evaluation ---------------------------------------------------------------


def evaluate(p: Polynomial, z) -> HornerResult:
    """
    Compensated Horner evaluation. Returns the value, the condition number
    sum|a_k||z|^k / |p(z)| and an a-priori bound on the absolute error.
    """
    z = complex(z)
    coeffs = p.coeffs.tolist()
    sr, si = coeffs[-1].real, coeffs[-1].imag
    cr = ci = 0.0
    zr, zi = z.real, z.imag
    absz = abs(z)
    magnitude = abs(coeffs[-1])
    for a in reversed(coeffs[:-1]):
        pr, pi, epr, epi = _cmul_eft(sr, si, zr, zi)
        sr, esr = _two_sum(pr, a.real)
        si, esi = _two_sum(pi, a.imag)
        cr, ci = (
            cr * zr - ci * zi + (epr + esr),
            cr * zi + ci * zr + (epi + esi),
        )
        magnitude = magnitude * absz + abs(a)
    value = complex(sr + cr, si + ci)
    n = max(p.degree, 1)
    gamma = 4 * n * EPS / (1 - 4 * n * EPS)
    condition = magnitude / abs(value) if value != 0 else math.inf
    return HornerResult(
        value=value,
        condition=condition,
        error_bound=EPS * abs(value) + gamma * gamma * magnitude,
    )


def log_abs_prod(roots: RootSet, z) -> float:
    """log|prod (z - root)| without forming the product; -inf at a root."""
    distances = np.abs(complex(z) - roots.atoms)
    if distances.size == 0:
        return 0.0
    if np.any(distances == 0):
        return -math.inf
    return math.fsum(np.log(distances).tolist())


def log_abs_sums(atoms, points, weights=None):
    """
    sum_k w_k log|z - atoms[k]| for every z in ``points``, chunked so the
    intermediate distance matrix stays within CHUNK_ENTRIES.
    """
    atoms = np.asarray(atoms, dtype=complex).reshape(-1)
    points = np.asarray(points, dtype=complex)
    shape = points.shape
    flat = points.reshape(-1)
    if weights is None:
        weights = np.ones(atoms.size)
    weights = np.asarray(weights, dtype=float)
    out = np.zeros(flat.size)
    if atoms.size == 0:
        return out.reshape(shape)
    rows = max(1, get_config("CHUNK_ENTRIES") // atoms.size)
    with np.errstate(divide="ignore"):
        for start in range(0, flat.size, rows):
            block = flat[start : start + rows]
            logs = np.log(np.abs(block[:, None] - atoms[None, :]))
            out[start : start + rows] = logs @ weights
    return out.reshape(shape)


def eval_rational(L: RationalSum, z) -> RationalEval:
    """S1 = sum a_k/(z - z_k) and S2 = sum a_k/(z - z_k)^2 by tree summation."""
    z = complex(z)
    differences = z - L.poles
    if np.any(differences == 0):
        raise PoleHit(f"z={z} coincides with a pole")
    inverse = 1.0 / differences
    first = L.weights * inverse
    second = first * inverse
    return RationalEval(
        s1=complex(pairwise_sum(first)), s2=complex(pairwise_sum(second))
    )


def rational_sums(weights, poles, points):
    """
    Vectorized companion of ``eval_rational`` for many evaluation points.

    Returns (S1, S2, T, M) where T = sum 1/(z - z_k) and
    M = sum |a_k / (z - z_k)| (the scale of the rounding error in S1).
    """
    weights = np.asarray(weights, dtype=complex)
    poles = np.asarray(poles, dtype=complex)
    points = np.asarray(points, dtype=complex).reshape(-1)
    s1 = np.empty(points.size, dtype=complex)
    s2 = np.empty(points.size, dtype=complex)
    t = np.empty(points.size, dtype=complex)
    magnitude = np.empty(points.size)
    rows = max(1, get_config("CHUNK_ENTRIES") // max(1, poles.size))
    with np.errstate(divide="ignore", invalid="ignore"):
        for start in range(0, points.size, rows):
            block = points[start : start + rows]
            inverse = 1.0 / (block[:, None] - poles[None, :])
            first = inverse * weights[None, :]
            s1[start : start + rows] = pairwise_sum(first)
            s2[start : start + rows] = pairwise_sum(first * inverse)
            t[start : start + rows] = pairwise_sum(inverse)
            magnitude[start : start + rows] = np.abs(first).sum(axis=1)
    return s1, s2, t, magnitude
