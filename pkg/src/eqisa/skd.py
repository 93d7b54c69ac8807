"""Recursive Solovay-Kitaev approximation of single-qubit unitaries.

The recursion follows the textbook scheme: approximate ``U`` at level
``n - 1``, write the residual ``Delta = U U_{n-1}^dagger`` as a balanced group
commutator ``V W V^dagger W^dagger``, approximate ``V`` and ``W`` at level
``n - 1``, and splice the pieces together. Level 0 is a nearest-neighbour
lookup in the basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import SKBasis, base_gate_matrix, nearest_element
from .circuit import Gate
from .errors import GateSetError, NumericsError
from .numerics import (
    IDENTITY2,
    UNITARY_TOL,
    dagger,
    from_quaternion,
    is_su2,
    phase_aligned_distance,
    project_su2,
    to_quaternion,
)

_AXIS_EPS = 1e-14


def _inverse_name(name: str) -> str:
    try:
        g = Gate(name)
    except ValueError as exc:
        raise GateSetError(f"{name!r} is not a known gate") from exc
    if g.arity != 1 or g.params:
        raise GateSetError(f"{name!r} has no parameter-free single-qubit inverse")
    return g.inverse().kind


def inverse_sequence(seq) -> list[str]:
    """Reverse a gate word and invert each symbol (``[H, T] -> [Tdg, H]``)."""
    return [_inverse_name(s) for s in reversed(list(seq))]


def simplify_sequence(seq) -> list[str]:
    """Cancel adjacent inverse pairs (``T Tdg``, ``H H``) until none remain."""
    out: list[str] = []
    for s in seq:
        if out and _inverse_name(out[-1]) == s:
            out.pop()
        else:
            out.append(s)
    return out


def sequence_matrix(seq) -> np.ndarray:
    """Product of the gate matrices of a word in circuit order (not projected)."""
    m = IDENTITY2
    for s in seq:
        m = base_gate_matrix(s) @ m
    return m


def _rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    half = angle / 2.0
    return from_quaternion(np.r_[math.cos(half), math.sin(half) * axis])


def balanced_commutator_decompose(delta) -> tuple[np.ndarray, np.ndarray]:
    """Split an SU(2) element into ``V W V^dagger W^dagger``.

    ``V`` and ``W`` are rotations by the same angle ``phi`` about orthogonal
    axes. Writing ``Delta`` as a rotation by ``theta``, ``phi`` solves
    ``sin(theta/2) = 2 sin^2(phi/2) sqrt(1 - sin^4(phi/2))``. The commutator of
    x- and y-rotations by ``phi`` is then conjugated onto ``Delta``'s axis.
    """
    delta = np.asarray(delta, dtype=complex)
    if not is_su2(delta, 1e-8):
        raise NumericsError("balanced_commutator_decompose expects an SU(2) matrix")
    q = to_quaternion(delta)
    if q[0] < 0:  # -Delta is the same rotation; keep theta in [0, pi]
        q = -q
    vec = q[1:]
    norm = float(np.linalg.norm(vec))
    if norm < _AXIS_EPS:
        return IDENTITY2.copy(), IDENTITY2.copy()
    axis = vec / norm
    theta = 2.0 * math.atan2(norm, q[0])
    # ((1 - cos(theta/2)) / 2)^(1/4) written without the cancellation at small theta
    phi = 2.0 * math.asin(math.sqrt(math.sin(theta / 4.0)))
    v = _rotation(np.array([1.0, 0.0, 0.0]), phi)
    w = _rotation(np.array([0.0, 1.0, 0.0]), phi)
    c = v @ w @ dagger(v) @ dagger(w)
    qc = to_quaternion(c)
    if qc[0] < 0:
        qc = -qc
    c_norm = float(np.linalg.norm(qc[1:]))
    if c_norm == 0.0:
        return IDENTITY2.copy(), IDENTITY2.copy()
    c_axis = qc[1:] / c_norm

    # rotation S carrying c_axis onto axis
    cross = np.cross(c_axis, axis)
    dot = float(np.clip(np.dot(c_axis, axis), -1.0, 1.0))
    sin_a = float(np.linalg.norm(cross))
    if sin_a < 1e-12:
        if dot > 0:
            s = IDENTITY2
        else:
            perp = np.cross(c_axis, [1.0, 0.0, 0.0])
            if np.linalg.norm(perp) < 1e-6:
                perp = np.cross(c_axis, [0.0, 1.0, 0.0])
            s = _rotation(perp / np.linalg.norm(perp), math.pi)
    else:
        s = _rotation(cross / sin_a, math.atan2(sin_a, dot))
    return s @ v @ dagger(s), s @ w @ dagger(s)


@dataclass(frozen=True)
class SkdResult:
    """Outcome of one decomposition.

    Attributes:
        sequence: Base-gate names in circuit order.
        error: Phase-aligned distance between the sequence's product and the
            target, recomputed from the gate matrices.
        recursion: Recursion degree used.
        level_errors: Error of the top-level approximation after each level
            0..recursion (before simplification, which does not change it).
        diverged: True when the last level made the approximation worse, a
            sign that the basis is too coarse for the recursion to contract.
    """

    sequence: tuple[str, ...]
    error: float
    recursion: int
    level_errors: tuple[float, ...] = field(default=())
    diverged: bool = False

    def __len__(self) -> int:
        return len(self.sequence)


class _Decomposer:
    def __init__(self, basis: SKBasis):
        self.basis = basis

    def run(self, u: np.ndarray, n: int, trace: list | None = None):
        if n == 0:
            elem, _ = nearest_element(u, self.basis)
            out = list(elem.word), elem.matrix
            if trace is not None:
                trace.append(out[1])
            return out
        prev_word, prev_m = self.run(u, n - 1, trace)
        delta = project_su2(u @ dagger(prev_m))
        v, w = balanced_commutator_decompose(delta)
        v_word, v_m = self.run(v, n - 1)
        w_word, w_m = self.run(w, n - 1)
        word = prev_word + inverse_sequence(w_word) + inverse_sequence(v_word) + w_word + v_word
        m = project_su2(v_m @ w_m @ dagger(v_m) @ dagger(w_m) @ prev_m)
        if trace is not None:
            trace.append(m)
        return word, m


def solovay_kitaev(u, n: int, basis: SKBasis, simplify: bool = True) -> SkdResult:
    """Approximate an SU(2) matrix by a word over the basis gates.

    Args:
        u: Target, a 2x2 matrix with determinant 1.
        n: Recursion degree (0 = plain nearest-element lookup).
        basis: The net used at level 0.
        simplify: Cancel adjacent inverse pairs in the final word.

    Raises:
        NumericsError: if ``u`` is not in SU(2).
    """
    u = np.asarray(u, dtype=complex)
    if not is_su2(u, UNITARY_TOL):
        raise NumericsError("solovay_kitaev expects an SU(2) matrix (unitary, det 1)")
    if int(n) < 0:
        raise ValueError(f"recursion degree must be >= 0, got {n}")
    trace: list[np.ndarray] = []
    word, _ = _Decomposer(basis).run(u, int(n), trace)
    level_errors = tuple(phase_aligned_distance(m, u) for m in trace)
    if simplify:
        word = simplify_sequence(word)
    err = phase_aligned_distance(sequence_matrix(word), u)
    diverged = len(level_errors) > 1 and level_errors[-1] > level_errors[-2]
    return SkdResult(tuple(word), err, int(n), level_errors, diverged)
