"""The Solovay-Kitaev basis: all short words over a 1-qubit gate set, deduplicated.

Words are tuples of base-gate names in circuit order (first element applied
first), so the matrix of ``("H", "T")`` is ``T @ H``. Labels are the names
joined together (``"HTdgH"``); the empty word has the label ``"[]"``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .circuit import FIXED_KINDS, Gate, gate_unitary
from .errors import GateSetError, NumericsError
from .numerics import (
    IDENTITY2,
    haar_random_su2,
    project_su2,
    quaternion_distance,
    to_quaternion,
)

DEFAULT_BASE_GATES = ("H", "T", "Tdg")
PRUNE_TOL = 1e-10
NULL_LABEL = "[]"
_FILE_MAGIC = "# eqisa sk-basis v1"


def word_label(word) -> str:
    return "".join(word) if word else NULL_LABEL


def split_label(label: str, base_gates=DEFAULT_BASE_GATES) -> tuple[str, ...]:
    """Split a label back into gate names by longest match (``"TdgH"`` -> ``("Tdg", "H")``)."""
    if label in (NULL_LABEL, ""):
        return ()
    names = sorted(base_gates, key=len, reverse=True)
    pattern = re.compile("|".join(re.escape(n) for n in names))
    out = []
    pos = 0
    while pos < len(label):
        m = pattern.match(label, pos)
        if not m:
            raise ValueError(f"label {label!r} is not a word over {tuple(base_gates)}")
        out.append(m.group(0))
        pos = m.end()
    return tuple(out)


def base_gate_matrix(name: str) -> np.ndarray:
    if name not in FIXED_KINDS or name == "CX":
        raise GateSetError(f"{name!r} is not a parameter-free 1-qubit gate")
    return gate_unitary(Gate(name))


def word_matrix(word) -> np.ndarray:
    """SU(2)-projected product of a word's gate matrices (circuit order)."""
    m = IDENTITY2
    for name in word:
        m = base_gate_matrix(name) @ m
    return project_su2(m)


def validate_gate_set(base_gates) -> None:
    """Check each gate has an inverse (up to phase) in the set."""
    if not base_gates:
        raise GateSetError("base gate set is empty")
    if len(set(base_gates)) != len(base_gates):
        raise GateSetError(f"duplicate base gates in {tuple(base_gates)}")
    mats = {g: base_gate_matrix(g) for g in base_gates}
    identity_q = to_quaternion(IDENTITY2)
    for g in base_gates:
        if not any(quaternion_distance(to_quaternion(mats[g] @ mats[h]), identity_q) < PRUNE_TOL for h in base_gates):
            raise GateSetError(f"gate set {tuple(base_gates)} is not closed under inversion: {g} has no inverse")


@dataclass(frozen=True)
class BasisElement:
    word: tuple[str, ...]
    matrix: np.ndarray

    @property
    def label(self) -> str:
        return word_label(self.word)

    def __len__(self) -> int:
        return len(self.word)


@dataclass(frozen=True, eq=False)
class SKBasis:
    """A pruned net of short gate words, ordered by (length, lexicographic)."""

    base_gates: tuple[str, ...]
    depth: int
    tolerance: float
    elements: tuple[BasisElement, ...]

    def __len__(self) -> int:
        return len(self.elements)

    @cached_property
    def quaternions(self) -> np.ndarray:
        return np.array([to_quaternion(e.matrix) for e in self.elements])

    @cached_property
    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.elements)

    @cached_property
    def non_null_labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.elements if e.word)

    @cached_property
    def by_label(self) -> dict[str, BasisElement]:
        return {e.label: e for e in self.elements}

    def same_as(self, other: "SKBasis") -> bool:
        return (
            self.base_gates == other.base_gates
            and self.depth == other.depth
            and self.labels == other.labels
            and all(np.allclose(a.matrix, b.matrix, atol=1e-12) for a, b in zip(self.elements, other.elements))
        )


def generate_basis(base_gates=DEFAULT_BASE_GATES, depth: int = 3, tol: float = PRUNE_TOL) -> SKBasis:
    """Enumerate every word of length 0..depth and keep the first of each class.

    Words are visited by length, then lexicographically in the order the base
    gates are given. A word is dropped when it lies within ``tol``
    (phase-aligned distance) of an element already kept, so identities fall
    to the null word and base gates always survive.

    Raises:
        GateSetError: if the gate set is not closed under inversion.
    """
    base_gates = tuple(base_gates)
    if int(depth) < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    validate_gate_set(base_gates)
    kept = [BasisElement((), IDENTITY2.copy())]
    quats = [to_quaternion(IDENTITY2)]
    for length in range(1, int(depth) + 1):
        for word in itertools.product(base_gates, repeat=length):
            m = word_matrix(word)
            q = to_quaternion(m)
            qs = np.asarray(quats)
            d = np.sqrt(np.minimum(np.sum((qs - q) ** 2, axis=1), np.sum((qs + q) ** 2, axis=1)))
            if d.min() < tol:
                continue
            kept.append(BasisElement(tuple(word), m))
            quats.append(q)
    return SKBasis(base_gates, int(depth), float(tol), tuple(kept))


def nearest_element(u, basis: SKBasis) -> tuple[BasisElement, float]:
    """Closest basis element to ``u`` up to global phase.

    Elements are scanned in basis order, so ties (within 1e-12) go to the
    shorter, then lexicographically smaller, label.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise NumericsError(f"nearest_element needs a 2x2 matrix, got {u.shape}")
    if not basis.elements:
        raise ValueError("basis is empty")
    i, d = _kernels.nearest(basis.quaternions, to_quaternion(u))
    return basis.elements[int(i)], float(d)


def epsilon_zero(basis: SKBasis, sample_count: int = 500, seed=0) -> float:
    """Largest nearest-element distance seen over Haar-random SU(2) samples."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(sample_count):
        _, d = nearest_element(haar_random_su2(rng), basis)
        worst = max(worst, d)
    return worst


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def _fmt(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}j"


def basis_to_text(basis: SKBasis) -> str:
    lines = [
        _FILE_MAGIC,
        f"base_gates\t{' '.join(basis.base_gates)}",
        f"depth\t{basis.depth}",
        f"tolerance\t{basis.tolerance!r}",
        f"elements\t{len(basis)}",
    ]
    for e in basis.elements:
        lines.append(f"{e.label}\t{' '.join(_fmt(z) for z in e.matrix.ravel())}")
    return "\n".join(lines) + "\n"


def basis_from_text(text: str) -> SKBasis:
    """Reload a basis file, checking every stored matrix against its word."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != _FILE_MAGIC:
        raise ValueError("not an sk-basis file")
    header = {}
    body = []
    for ln in lines[1:]:
        if not ln.strip():
            continue
        key, _, value = ln.partition("\t")
        if key in ("base_gates", "depth", "tolerance", "elements") and len(header) < 4:
            header[key] = value
        else:
            body.append((key, value))
    try:
        base_gates = tuple(header["base_gates"].split())
        depth = int(header["depth"])
        tol = float(header["tolerance"])
        count = int(header["elements"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad sk-basis header: {exc}") from exc
    if len(body) != count:
        raise ValueError(f"expected {count} elements, found {len(body)}")
    elements = []
    for label, value in body:
        word = split_label(label, base_gates)
        m = np.array([complex(tok) for tok in value.split()], dtype=complex).reshape(2, 2)
        if quaternion_distance(to_quaternion(m), to_quaternion(word_matrix(word))) > 1e-10:
            raise ValueError(f"stored matrix for {label!r} does not match its word")
        elements.append(BasisElement(word, m))
    return SKBasis(base_gates, depth, tol, tuple(elements))


def save_basis(basis: SKBasis, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(basis_to_text(basis))


def load_basis(path) -> SKBasis:
    with open(path, encoding="utf-8") as fh:
        return basis_from_text(fh.read())
