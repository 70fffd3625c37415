"""
Empirical measures and the ways we compare them.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
import ot
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist
from scipy.stats import wasserstein_distance

from .conf import get_config
from .exceptions import (
    AtomAtOrigin,
    EmptySet,
    GridMismatch,
    InvalidPolynomial,
    TooLarge,
    ValidationError,
    ZeroEndCoefficient,
)
from .polycore import Polynomial, RootSet, log_abs_sums

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Weighted atoms with weights summing to one."""

    atoms: np.ndarray
    weights: np.ndarray
    uniform: bool = field(init=False)

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=complex).reshape(-1)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if atoms.size == 0:
            raise EmptySet("an empirical measure needs at least one atom")
        if atoms.shape != weights.shape:
            raise ValidationError(f"{atoms.size} atoms given with {weights.size} weights")
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValidationError("weights must be positive and sum to 1")
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "uniform", bool(np.all(weights == weights[0])))

    @classmethod
    def from_rootset(cls, R: RootSet) -> "EmpiricalMeasure":
        if len(R) == 0:
            raise EmptySet("cannot build a measure from an empty root set")
        return cls(R.atoms, np.full(len(R), 1.0 / len(R)))

    @classmethod
    def from_atoms(cls, atoms, weights=None) -> "EmpiricalMeasure":
        """Uniform over ``atoms``, or proportional to positive ``weights``."""
        atoms = np.asarray(atoms, dtype=complex).reshape(-1)
        if atoms.size == 0:
            raise EmptySet("cannot build a measure from no atoms")
        if weights is None:
            return cls(atoms, np.full(atoms.size, 1.0 / atoms.size))
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if np.any(weights <= 0):
            raise ValidationError("weights must be positive")
        return cls(atoms, weights / weights.sum())

    @classmethod
    def mixture(cls, first, second, p: float) -> "EmpiricalMeasure":
        """p * first + (1 - p) * second."""
        if not 0 <= p <= 1:
            raise ValidationError("mixture weight must lie in [0, 1]")
        parts = [(m, w) for m, w in ((first, p), (second, 1.0 - p)) if w > 0]
        atoms = np.concatenate([m.atoms for m, _ in parts])
        weights = np.concatenate([w * m.weights for m, w in parts])
        return cls.from_atoms(atoms, weights)

    def __len__(self):
        return self.atoms.size

    def coalesced(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Distinct atoms, their total weights and their repetition counts."""
        distinct, inverse, counts = np.unique(
            self.atoms, return_inverse=True, return_counts=True
        )
        weights = np.zeros(distinct.size)
        np.add.at(weights, inverse.reshape(-1), self.weights)
        return distinct, weights, counts

    def __repr__(self):
        return f"EmpiricalMeasure(size={len(self)}, uniform={self.uniform})"


def _plane(values):
    return np.column_stack([values.real, values.imag])


# -- transport ----------------------------------------------------------------------


def w1_exact(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    """
    Wasserstein-1 distance by network simplex on the bipartite graph of
    distinct atoms. Two uniform measures use integer supplies scaled by
    lcm(|mu|, |nu|); other weights are renormalized so both sides carry the
    same float mass.
    """
    x, wx, cx = mu.coalesced()
    y, wy, cy = nu.coalesced()
    if x.size == 1 or y.size == 1:
        if x.size == 1:
            return float(np.dot(wy, np.abs(y - x[0])))
        return float(np.dot(wx, np.abs(x - y[0])))
    limit = get_config("W1_EXACT_MAX_PAIRS")
    if x.size * y.size > limit:
        raise TooLarge(
            f"{x.size} x {y.size} atom pairs exceed W1_EXACT_MAX_PAIRS={limit}"
        )
    if mu.uniform and nu.uniform:
        total = math.lcm(len(mu), len(nu))
        supply = cx * float(total // len(mu))
        demand = cy * float(total // len(nu))
    else:
        total = 1.0
        supply = wx
        demand = wy * (wx.sum() / wy.sum())
    cost, log = ot.emd2(
        supply,
        demand,
        cdist(_plane(x), _plane(y)),
        numItermax=int(get_config("W1_NUM_ITER_MAX")),
        log=True,
    )
    if log.get("warning"):
        logger.warning("network simplex: %s", log["warning"])
    return float(cost) / total


def w1_sliced(mu: EmpiricalMeasure, nu: EmpiricalMeasure, n_projections=None, seed=0) -> float:
    """Mean over random directions of the 1-D Wasserstein-1 of the projected atoms."""
    if n_projections is None:
        n_projections = get_config("SLICED_PROJECTIONS")
    if n_projections < 1:
        raise ValidationError("n_projections must be at least 1")
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, np.pi, n_projections)
    total = 0.0
    for theta in angles.tolist():
        rotation = complex(math.cos(theta), -math.sin(theta))
        total += wasserstein_distance(
            (mu.atoms * rotation).real,
            (nu.atoms * rotation).real,
            mu.weights,
            nu.weights,
        )
    return total / n_projections


# -- discrepancy ------------------------------------------------------------------


def angular_discrepancy(mu: EmpiricalMeasure) -> float:
    """
    sup over arcs [a, b) of |mu(arg in arc) - (b - a)/2pi|, exactly: with
    G(t) = mu(arg/2pi < t) - t the supremum is sup G - inf G, both attained
    at atom arguments.
    """
    if np.any(mu.atoms == 0):
        raise AtomAtOrigin("the argument of an atom at 0 is undefined")
    turns = np.mod(np.angle(mu.atoms) / (2 * np.pi), 1.0)
    order = np.argsort(turns, kind="stable")
    turns = turns[order]
    after = np.cumsum(mu.weights[order])
    before = after - mu.weights[order]
    highest = max(0.0, float(np.max(after - turns)))
    lowest = min(0.0, float(np.min(before - turns)))
    return highest - lowest


def erdos_turan_rhs(p: Polynomial, C: Optional[float] = None) -> float:
    """C/N * log(sum|a_k| / sqrt(|a_0 a_N|))."""
    if C is None:
        C = get_config("ERDOS_TURAN_C")
    if p.degree < 1:
        raise InvalidPolynomial("erdos_turan_rhs needs degree >= 1")
    a0, aN = abs(p.coeffs[0]), abs(p.coeffs[-1])
    if a0 == 0 or aN == 0:
        raise ZeroEndCoefficient("erdos_turan_rhs needs a_0 * a_N != 0")
    total = math.fsum(np.abs(p.coeffs).tolist())
    return C / p.degree * (math.log(total) - 0.5 * (math.log(a0) + math.log(aN)))


# -- potentials --------------------------------------------------------------------


def log_potential(mu: EmpiricalMeasure, z):
    """sum_k w_k log|z - atom_k|, -inf at an atom; ``z`` may be an array."""
    values = log_abs_sums(mu.atoms, z, mu.weights)
    if np.ndim(z) == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class GridSpec:
    """Rectangular lattice: corner + spacing * (i + 1j * j), 0 <= i < nx, 0 <= j < ny."""

    corner: complex
    spacing: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.spacing <= 0 or self.nx < 1 or self.ny < 1:
            raise ValidationError("grid needs positive spacing and counts")
        object.__setattr__(self, "corner", complex(self.corner))
        object.__setattr__(self, "spacing", float(self.spacing))

    @classmethod
    def square(cls, half_width: float, count: int, center: complex = 0j) -> "GridSpec":
        """count x count nodes covering [-half_width, half_width]^2 around ``center``."""
        if count < 2:
            raise ValidationError("square grid needs at least 2 nodes per side")
        spacing = 2.0 * half_width / (count - 1)
        return cls(center - half_width * (1 + 1j), spacing, count, count)

    def nodes(self) -> np.ndarray:
        i = np.arange(self.nx)
        j = np.arange(self.ny)
        return self.corner + self.spacing * (i[None, :] + 1j * j[:, None])


@dataclass(frozen=True, eq=False)
class GridField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.ny, self.grid.nx):
            raise GridMismatch(
                f"values of shape {values.shape} do not fit a {self.grid.ny}x{self.grid.nx} grid"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def potential_field(mu: EmpiricalMeasure, grid: GridSpec) -> GridField:
    return GridField(grid, log_potential(mu, grid.nodes()))


def function_field(func: Callable[[np.ndarray], np.ndarray], grid: GridSpec) -> GridField:
    """Evaluate a vectorized function of z on the grid, e.g. ``lambda z: np.log(np.maximum(abs(z), 1))``."""
    return GridField(grid, func(grid.nodes()))


def atom_distance_mask(grid: GridSpec, atoms, h: Optional[float] = None) -> np.ndarray:
    """Nodes at distance >= h from every atom; h defaults to twice the spacing."""
    if h is None:
        h = 2.0 * grid.spacing
    atoms = np.asarray(atoms, dtype=complex).reshape(-1)
    nodes = grid.nodes()
    if atoms.size == 0:
        return np.ones(nodes.shape, dtype=bool)
    distance, _ = cKDTree(_plane(atoms)).query(_plane(nodes.reshape(-1)))
    return (distance >= h).reshape(nodes.shape)


def field_sup_distance(F1: GridField, F2: GridField, mask=None) -> float:
    """sup of |F1 - F2| over masked nodes where both fields are finite."""
    if F1.grid != F2.grid:
        raise GridMismatch("fields live on different grids")
    keep = np.isfinite(F1.values) & np.isfinite(F2.values)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != keep.shape:
            raise GridMismatch("mask shape does not match the grid")
        keep &= mask
    if not np.any(keep):
        return 0.0
    return float(np.max(np.abs(F1.values - F2.values)[keep]))


def compare_potentials(mu: EmpiricalMeasure, nu: EmpiricalMeasure, grid: GridSpec, h=None) -> float:
    """Sup distance of the two log potentials away from every atom of either measure."""
    mask = atom_distance_mask(grid, np.concatenate([mu.atoms, nu.atoms]), h)
    return field_sup_distance(potential_field(mu, grid), potential_field(nu, grid), mask)
