"""
Plain-text atom files.

One atom per line as ``re im`` or ``re im weight`` (decimal floats separated by
whitespace). Lines starting with ``#`` and blank lines are ignored. Files are
UTF-8; values are written with 17 significant digits so a write/read cycle
reproduces every float exactly.
"""

import logging
from pathlib import Path

import numpy as np

from .exceptions import InvalidAtomFile

logger = logging.getLogger(__name__)


def parse_atoms(text, source="<string>"):
    """Parse atom-file text. Returns (atoms, weights); weights is None for two-column files."""
    atoms = []
    weights = []
    columns = None
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) not in (2, 3):
            raise InvalidAtomFile(
                f"{source}:{number}: expected 're im' or 're im weight', got {len(fields)} fields"
            )
        if columns is None:
            columns = len(fields)
        elif columns != len(fields):
            raise InvalidAtomFile(f"{source}:{number}: mixed two- and three-column rows")
        try:
            values = [float(field) for field in fields]
        except ValueError as exc:
            raise InvalidAtomFile(f"{source}:{number}: {exc}") from exc
        if not all(np.isfinite(values)):
            raise InvalidAtomFile(f"{source}:{number}: non-finite value")
        atoms.append(complex(values[0], values[1]))
        if columns == 3:
            if values[2] <= 0:
                raise InvalidAtomFile(f"{source}:{number}: weights must be positive")
            weights.append(values[2])
    return (
        np.array(atoms, dtype=complex),
        np.array(weights, dtype=float) if columns == 3 else None,
    )


def read_atoms(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InvalidAtomFile(f"cannot read {path}: {exc}") from exc
    atoms, weights = parse_atoms(text, source=str(path))
    logger.debug("read %d atoms from %s", atoms.size, path)
    return atoms, weights


def format_atoms(atoms, weights=None, header=None):
    lines = []
    if header:
        lines.extend(f"# {row}" for row in str(header).splitlines())
    atoms = np.asarray(atoms, dtype=complex).reshape(-1)
    if weights is None:
        for atom in atoms.tolist():
            lines.append(f"{atom.real:.17g} {atom.imag:.17g}")
    else:
        weights = np.asarray(weights, dtype=float).reshape(-1)
        for atom, weight in zip(atoms.tolist(), weights.tolist()):
            lines.append(f"{atom.real:.17g} {atom.imag:.17g} {weight:.17g}")
    return "\n".join(lines) + "\n"


def write_atoms(path, atoms, weights=None, header=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_atoms(atoms, weights, header), encoding="utf-8")
    return path
