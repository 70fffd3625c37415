"""
Deterministic zero sequences and random ensembles.

Every random draw goes through a numpy ``Generator`` built from
``SeedSequence(seed, spawn_key=(stream, ...))``. Sequence kinds draw one
independent stream per concern (choices, noise, thinning) and consume it in
index order, so a degree-n output is a prefix of the degree-m output for the
same seed whenever n < m.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Union

import numpy as np

from .atomfiles import read_atoms
from .exceptions import InvalidRadii, InvalidSpec
from .polycore import Polynomial, RationalSum, RootSet
from .rootfind import GOLDEN_ANGLE, aberth_roots

logger = logging.getLogger(__name__)

Seed = int
SEED_MASK = (1 << 64) - 1

# spawn-key stream ids
STREAM_CHOICE = 1
STREAM_LAW = 2
STREAM_THINNING = 3
STREAM_DELETION = 4
STREAM_WEIGHTS = 5
STREAM_REFERENCE = 6
STREAM_PROBE = 7


class EnsembleKind(str, enum.Enum):
    PAIRWISE_CHOICE = "pairwise_choice"
    TRIANGULAR_PAIRWISE = "triangular_pairwise"
    IID = "iid"
    PERTURBATION = "perturbation"
    BERNOULLI_THINNING = "bernoulli_thinning"
    RANDOM_DELETION = "random_deletion"
    DETERMINISTIC = "deterministic"
    CAUCHY_PAIRS = "cauchy_pairs"
    GENERALIZED_DERIVATIVE = "generalized_derivative"


SEQUENCE_KINDS = frozenset(
    {
        EnsembleKind.PAIRWISE_CHOICE,
        EnsembleKind.IID,
        EnsembleKind.PERTURBATION,
        EnsembleKind.BERNOULLI_THINNING,
    }
)

LAWS = ("uniform_circle", "uniform_disk", "complex_gaussian", "cauchy")
WEIGHT_LAWS = ("ones", "exponential", "uniform", "complex_gaussian", "dirichlet")
FAMILIES = (
    "roots_of_unity",
    "dyadic",
    "truncated_roots_of_unity",
    "example1",
    "lemniscate",
)

# Parameter defaults per kind; keys outside these tables are rejected.
PARAMETER_DEFAULTS = {
    EnsembleKind.PAIRWISE_CHOICE: {
        "a": "circle",
        "b": "golden_rotation",
        "scale_a": 1.0,
        "scale_b": 1.0,
    },
    EnsembleKind.TRIANGULAR_PAIRWISE: {"base": "roots_of_unity", "offset": 0.5, "scale": 1.0},
    EnsembleKind.IID: {"law": "uniform_circle", "scale": 1.0},
    EnsembleKind.PERTURBATION: {
        "base": "circle",
        "law": "complex_gaussian",
        "scale": 1.0,
        "exponent": 0.5,
    },
    EnsembleKind.BERNOULLI_THINNING: {"base": "circle", "p": 0.5, "scale": 1.0},
    EnsembleKind.RANDOM_DELETION: {"base": "circle", "scale": 1.0},
    EnsembleKind.DETERMINISTIC: {
        "family": "roots_of_unity",
        "radii": [1.0, 2.0],
        "poly_coeffs": [[-0.09, 0.0], [0.0, 0.0], [1.0, 0.0]],
    },
    EnsembleKind.CAUCHY_PAIRS: {},
    EnsembleKind.GENERALIZED_DERIVATIVE: {
        "weights": "ones",
        "normalize": False,
        "poles": "circle",
        "scale": 1.0,
    },
}


# -- seeding ----------------------------------------------------------------------


def validate_seed(seed) -> Seed:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise InvalidSpec(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= SEED_MASK:
        raise InvalidSpec("seed must fit in 64 unsigned bits")
    return seed


def derive_seed(master: Seed, index: int) -> Seed:
    """Per-trial seed: a SeedSequence mix of (master, index) folded to 64 bits."""
    words = np.random.SeedSequence(
        entropy=validate_seed(master), spawn_key=(int(index),)
    ).generate_state(2, dtype=np.uint32)
    return (int(words[0]) << 32) | int(words[1])


def stream(seed: Seed, *key) -> np.random.Generator:
    """Independent generator for one named concern of one seed."""
    sequence = np.random.SeedSequence(entropy=validate_seed(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(sequence))


# -- deterministic sequences ----------------------------------------------------


def radical_inverse(indices, base=2):
    """Van der Corput radical inverse of each non-negative integer index."""
    remaining = np.array(indices, dtype=np.int64).reshape(-1)
    result = np.zeros(remaining.size)
    factor = 1.0 / base
    while np.any(remaining):
        remaining, digit = np.divmod(remaining, base)
        result += digit * factor
        factor /= base
    return result


def _turns_to_points(turns):
    angle = 2 * np.pi * np.asarray(turns, dtype=float)
    return np.cos(angle) + 1j * np.sin(angle)


def bit_reversed_circle(n: int) -> RootSet:
    """exp(2 pi i vdc(k)) for k = 0..n-1."""
    if n < 1:
        raise InvalidSpec("bit_reversed_circle needs n >= 1")
    return RootSet(_turns_to_points(radical_inverse(np.arange(n))))


def low_discrepancy_disk(n: int) -> RootSet:
    """Halton points in the unit disk: radius sqrt(vdc_2(k)), angle 2 pi vdc_3(k), k = 1..n."""
    if n < 1:
        raise InvalidSpec("low_discrepancy_disk needs n >= 1")
    k = np.arange(1, n + 1)
    radius = np.sqrt(radical_inverse(k, 2))
    return RootSet(radius * _turns_to_points(radical_inverse(k, 3)))


def _dyadic_turns(n):
    turns = [0.0, 0.5]
    while len(turns) < n:
        shift = 1.0 / (2 * len(turns))
        turns.extend((t + shift) % 1.0 for t in list(turns))
    return np.array(turns[:n])


def dyadic_sequence(n: int) -> RootSet:
    """z_1 = 1, z_2 = -1, and each block of length 2^m repeats the prefix rotated by e^{2 pi i / 2^{m+1}}."""
    if n < 1:
        raise InvalidSpec("dyadic_sequence needs n >= 1")
    return RootSet(_turns_to_points(_dyadic_turns(n)))


def roots_of_unity(n: int) -> RootSet:
    return RootSet(_turns_to_points(np.arange(n) / n))


def truncated_roots_of_unity(n: int) -> RootSet:
    """Zeros of (z^{n+1} - 1)/(z - 1): the (n+1)-th roots of unity other than 1."""
    return RootSet(_turns_to_points(np.arange(1, n + 1) / (n + 1)))


def example1_roots(radii, n: int) -> RootSet:
    """All zeros of prod_j (z^n - a_j^n): a_j e^{2 pi i l / n} for every radius and l."""
    radii = np.asarray(radii, dtype=float).reshape(-1)
    if radii.size == 0 or np.any(~np.isfinite(radii)) or np.any(radii <= 0):
        raise InvalidRadii("radii must be finite and positive")
    if np.any(np.diff(radii) <= 0):
        raise InvalidRadii("radii must be strictly increasing")
    if n < 1:
        raise InvalidSpec("example1_roots needs n >= 1")
    circle = roots_of_unity(n).atoms
    return RootSet((radii[:, None] * circle[None, :]).reshape(-1))


def lemniscate_roots(P: Polynomial, n: int) -> RootSet:
    """Zeros of P^n - 1 as the union over n-th roots of unity w of the zeros of P - w."""
    if P.degree < 1:
        raise InvalidSpec("lemniscate_roots needs deg P >= 1")
    if n < 1:
        raise InvalidSpec("lemniscate_roots needs n >= 1")
    atoms = []
    for omega in roots_of_unity(n).atoms.tolist():
        coeffs = np.array(P.coeffs)
        coeffs[0] -= omega
        atoms.append(aberth_roots(Polynomial(coeffs)).roots.atoms)
    return RootSet(np.concatenate(atoms))


def log_cesaro_profile(atoms: RootSet) -> np.ndarray:
    """Prefix averages (1/n) sum_{i <= n} log_+|a_i| for n = 1..len(atoms)."""
    values = np.log(np.maximum(np.abs(atoms.atoms), 1.0))
    if values.size == 0:
        return values
    return np.cumsum(values) / np.arange(1, values.size + 1)


# -- base sequences ----------------------------------------------------------------

_file_cache = {}


def _file_atoms(path):
    if path not in _file_cache:
        atoms, _ = read_atoms(path)
        _file_cache[path] = atoms
    return _file_cache[path]


def base_sequence(name: str, n: int, scale: float = 1.0) -> RootSet:
    """
    Prefix of a named base sequence: ``circle``, ``disk``, ``dyadic``,
    ``roots_of_unity`` or ``file:<path>``.
    """
    if name == "circle":
        atoms = bit_reversed_circle(n).atoms
    elif name == "disk":
        atoms = low_discrepancy_disk(n).atoms
    elif name == "dyadic":
        atoms = dyadic_sequence(n).atoms
    elif name == "roots_of_unity":
        atoms = roots_of_unity(n).atoms
    elif isinstance(name, str) and name.startswith("file:"):
        atoms = _file_atoms(name[len("file:") :])
        if atoms.size < n:
            raise InvalidSpec(f"{name} holds {atoms.size} atoms, {n} requested")
        atoms = atoms[:n]
    else:
        raise InvalidSpec(f"unknown base sequence {name!r}")
    return RootSet(scale * atoms)


def _is_base_name(name):
    return name in ("circle", "disk", "dyadic", "roots_of_unity") or (
        isinstance(name, str) and name.startswith("file:")
    )


def sample_law(law: str, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw from one of the four shipped laws using only inverse-CDF or normal draws."""
    if law == "uniform_circle":
        return _turns_to_points(rng.random(size))
    if law == "uniform_disk":
        uv = rng.random((size, 2))
        return np.sqrt(uv[:, 0]) * _turns_to_points(uv[:, 1])
    if law == "complex_gaussian":
        xy = rng.standard_normal((size, 2)) / math.sqrt(2.0)
        return xy[:, 0] + 1j * xy[:, 1]
    if law == "cauchy":
        return np.tan(np.pi * (rng.random(size) - 0.5)) + 0j
    raise InvalidSpec(f"unknown law {law!r}")


# -- specs -------------------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleSpec:
    """An ensemble kind plus its validated, defaults-filled parameters."""

    kind: EnsembleKind
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        try:
            kind = EnsembleKind(self.kind)
        except ValueError as exc:
            raise InvalidSpec(f"unknown ensemble kind {self.kind!r}") from exc
        object.__setattr__(self, "kind", kind)
        params = dict(PARAMETER_DEFAULTS[kind])
        unknown = sorted(set(self.params) - set(params))
        if unknown:
            raise InvalidSpec(f"{kind.value}: unknown parameters {', '.join(unknown)}")
        params.update(self.params)
        object.__setattr__(self, "params", params)
        self.validate()

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EnsembleSpec":
        data = dict(data)
        if "kind" not in data:
            raise InvalidSpec("ensemble table needs a 'kind'")
        kind = data.pop("kind")
        return cls(kind=kind, params=data)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, **self.params}

    @property
    def is_sequence_kind(self) -> bool:
        return self.kind in SEQUENCE_KINDS

    def validate(self):
        kind, params = self.kind, self.params
        for key in ("scale", "scale_a", "scale_b"):
            if key in params and not (
                isinstance(params[key], (int, float)) and params[key] > 0
            ):
                raise InvalidSpec(f"{kind.value}: {key} must be positive")
        if kind == EnsembleKind.PAIRWISE_CHOICE:
            if not _is_base_name(params["a"]):
                raise InvalidSpec(f"pairwise_choice: unknown base {params['a']!r}")
            if params["b"] != "golden_rotation" and not _is_base_name(params["b"]):
                raise InvalidSpec(f"pairwise_choice: unknown base {params['b']!r}")
        elif kind == EnsembleKind.TRIANGULAR_PAIRWISE:
            if not _is_base_name(params["base"]):
                raise InvalidSpec(f"triangular_pairwise: unknown base {params['base']!r}")
            if not 0 < float(params["offset"]) < 1:
                raise InvalidSpec("triangular_pairwise: offset must lie in (0, 1)")
        elif kind in (EnsembleKind.IID, EnsembleKind.PERTURBATION):
            if params["law"] not in LAWS:
                raise InvalidSpec(f"{kind.value}: law must be one of {', '.join(LAWS)}")
            if kind == EnsembleKind.PERTURBATION:
                if not _is_base_name(params["base"]):
                    raise InvalidSpec(f"perturbation: unknown base {params['base']!r}")
                if not float(params["exponent"]) > 0:
                    raise InvalidSpec("perturbation: sigma_k = scale * k^-exponent needs exponent > 0")
        elif kind == EnsembleKind.BERNOULLI_THINNING:
            if not _is_base_name(params["base"]):
                raise InvalidSpec(f"bernoulli_thinning: unknown base {params['base']!r}")
            if not 0 < float(params["p"]) < 1:
                raise InvalidSpec("bernoulli_thinning: p must satisfy 0 < p < 1")
        elif kind == EnsembleKind.RANDOM_DELETION:
            if not _is_base_name(params["base"]):
                raise InvalidSpec(f"random_deletion: unknown base {params['base']!r}")
        elif kind == EnsembleKind.DETERMINISTIC:
            if params["family"] not in FAMILIES:
                raise InvalidSpec(f"deterministic: family must be one of {', '.join(FAMILIES)}")
            if params["family"] == "example1":
                example1_roots(params["radii"], 1)
            if params["family"] == "lemniscate" and self.lemniscate_polynomial().degree < 1:
                raise InvalidSpec("deterministic: lemniscate needs deg P >= 1")
        elif kind == EnsembleKind.GENERALIZED_DERIVATIVE:
            if params["weights"] not in WEIGHT_LAWS:
                raise InvalidSpec(
                    f"generalized_derivative: weights must be one of {', '.join(WEIGHT_LAWS)}"
                )
            if not _is_base_name(params["poles"]):
                raise InvalidSpec(f"generalized_derivative: unknown base {params['poles']!r}")
        return self

    def lemniscate_polynomial(self) -> Polynomial:
        coeffs = []
        for entry in self.params["poly_coeffs"]:
            if isinstance(entry, (list, tuple)):
                coeffs.append(complex(entry[0], entry[1]))
            else:
                coeffs.append(complex(entry))
        return Polynomial(coeffs)

    def degree(self, n: int) -> int:
        """Number of zeros produced for index n."""
        if self.kind == EnsembleKind.CAUCHY_PAIRS:
            return 2 * n
        if self.kind == EnsembleKind.DETERMINISTIC:
            family = self.params["family"]
            if family == "example1":
                return len(self.params["radii"]) * n
            if family == "lemniscate":
                return self.lemniscate_polynomial().degree * n
        return n


# -- generation --------------------------------------------------------------------


def _pairwise_choice(params, n, seed):
    a = base_sequence(params["a"], n, params["scale_a"]).atoms
    if params["b"] == "golden_rotation":
        b = a * (params["scale_b"] / params["scale_a"]) * np.exp(1j * GOLDEN_ANGLE)
    else:
        b = base_sequence(params["b"], n, params["scale_b"]).atoms
    pick_a = stream(seed, STREAM_CHOICE).random(n) < 0.5
    return np.where(pick_a, a, b)


def _triangular_pairwise(params, n, seed):
    a = base_sequence(params["base"], n, params["scale"]).atoms
    b = a * np.exp(2j * np.pi * float(params["offset"]) / n)
    pick_a = stream(seed, STREAM_CHOICE, n).random(n) < 0.5
    return np.where(pick_a, a, b)


def _perturbation(params, n, seed):
    base = base_sequence(params["base"], n).atoms
    sigma = params["scale"] * np.arange(1, n + 1, dtype=float) ** (-float(params["exponent"]))
    noise = sample_law(params["law"], stream(seed, STREAM_LAW), n)
    return base + sigma * noise


def _bernoulli_thinning(params, n, seed):
    p = float(params["p"])
    rng = stream(seed, STREAM_THINNING)
    kept = []
    consumed = 0
    chunk = max(16, int(math.ceil(2 * n / p)))
    while len(kept) < n:
        keep = np.flatnonzero(rng.random(chunk) < p) + consumed
        kept.extend(keep.tolist())
        consumed += chunk
    indices = np.array(kept[:n])
    base = base_sequence(params["base"], int(indices[-1]) + 1, params["scale"]).atoms
    return base[indices]


def _random_deletion(params, n, seed):
    base = base_sequence(params["base"], n + 1, params["scale"]).atoms
    dropped = int(stream(seed, STREAM_DELETION).integers(n + 1))
    return np.delete(base, dropped)


def _deterministic(spec, n):
    family = spec.params["family"]
    if family == "roots_of_unity":
        return roots_of_unity(n).atoms
    if family == "dyadic":
        return dyadic_sequence(n).atoms
    if family == "truncated_roots_of_unity":
        return truncated_roots_of_unity(n).atoms
    if family == "example1":
        return example1_roots(spec.params["radii"], n).atoms
    return lemniscate_roots(spec.lemniscate_polynomial(), n).atoms


def _cauchy_pairs(n, seed):
    x = sample_law("cauchy", stream(seed, STREAM_LAW), n).real
    return np.concatenate([x + 1j, x - 1j])


def sample_weights(law, rng, n, normalize=False):
    if law == "ones":
        weights = np.ones(n, dtype=complex)
    elif law == "exponential":
        weights = -np.log1p(-rng.random(n)) + 0j
    elif law == "uniform":
        weights = rng.random(n) + 0j
    elif law == "complex_gaussian":
        weights = sample_law("complex_gaussian", rng, n)
    elif law == "dirichlet":
        gamma = -np.log1p(-rng.random(n))
        weights = n * gamma / gamma.sum() + 0j
    else:
        raise InvalidSpec(f"unknown weight law {law!r}")
    if normalize and law != "dirichlet":
        total = weights.sum()
        if total == 0:
            raise InvalidSpec("cannot normalize weights that sum to zero")
        weights = weights * (n / total)
    return weights


def _generalized_derivative(params, n, seed):
    poles = base_sequence(params["poles"], n, params["scale"]).atoms
    weights = sample_weights(
        params["weights"], stream(seed, STREAM_WEIGHTS), n, bool(params["normalize"])
    )
    return RationalSum(weights, poles)


def generate(spec: EnsembleSpec, n: int, seed: Seed) -> Union[RootSet, RationalSum]:
    """Zeros (or, for generalized derivatives, the rational sum) of ensemble ``spec`` at index n."""
    if n < 1:
        raise InvalidSpec("generate needs n >= 1")
    seed = validate_seed(seed)
    kind, params = spec.kind, spec.params
    if kind == EnsembleKind.PAIRWISE_CHOICE:
        atoms = _pairwise_choice(params, n, seed)
    elif kind == EnsembleKind.TRIANGULAR_PAIRWISE:
        atoms = _triangular_pairwise(params, n, seed)
    elif kind == EnsembleKind.IID:
        atoms = params["scale"] * sample_law(params["law"], stream(seed, STREAM_LAW), n)
    elif kind == EnsembleKind.PERTURBATION:
        atoms = _perturbation(params, n, seed)
    elif kind == EnsembleKind.BERNOULLI_THINNING:
        atoms = _bernoulli_thinning(params, n, seed)
    elif kind == EnsembleKind.RANDOM_DELETION:
        atoms = _random_deletion(params, n, seed)
    elif kind == EnsembleKind.DETERMINISTIC:
        atoms = _deterministic(spec, n)
    elif kind == EnsembleKind.CAUCHY_PAIRS:
        atoms = _cauchy_pairs(n, seed)
    else:
        return _generalized_derivative(params, n, seed)
    return RootSet(atoms)


def reference_rootset(spec: EnsembleSpec, size: int, seed: Seed) -> RootSet:
    """
    A large atomic stand-in for the limiting zero measure of ``spec``.

    Base-driven kinds use a base prefix of ``size`` atoms; i.i.d. kinds use a
    fresh sample on a separate stream; unit-circle families use the
    bit-reversed circle; scaled families are regenerated at a larger index.
    """
    kind, params = spec.kind, spec.params
    if kind == EnsembleKind.PAIRWISE_CHOICE:
        return base_sequence(params["a"], size, params["scale_a"])
    if kind in (
        EnsembleKind.TRIANGULAR_PAIRWISE,
        EnsembleKind.BERNOULLI_THINNING,
        EnsembleKind.RANDOM_DELETION,
    ):
        return base_sequence(params["base"], size, params["scale"])
    if kind == EnsembleKind.PERTURBATION:
        return base_sequence(params["base"], size)
    if kind == EnsembleKind.GENERALIZED_DERIVATIVE:
        return base_sequence(params["poles"], size, params["scale"])
    if kind == EnsembleKind.IID:
        rng = stream(validate_seed(seed), STREAM_REFERENCE)
        return RootSet(params["scale"] * sample_law(params["law"], rng, size))
    if kind == EnsembleKind.CAUCHY_PAIRS:
        return generate(spec, max(1, size // 2), derive_seed(seed, STREAM_REFERENCE))
    family = params["family"]
    if family in ("roots_of_unity", "dyadic", "truncated_roots_of_unity"):
        return bit_reversed_circle(size)
    per_index = spec.degree(1)
    return generate(spec, max(1, size // per_index), seed)
