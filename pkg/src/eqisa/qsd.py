"""Quantum Shannon decomposition into 1-qubit rotations and CX, and lowering to {H, T, Tdg, CX}.

An ``n``-qubit unitary is split by a cosine-sine decomposition on its most
significant qubit, the block-diagonal factors are demultiplexed into a
multiplexed RZ between two ``(n-1)``-qubit unitaries, and the middle factor is
a multiplexed RY. Multiplexed rotations become alternating rotations and CX
gates along a Gray code. Two-qubit blocks use a magic-basis (KAK) split with a
three-CX core; single-qubit blocks become one U3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import SKBasis
from .circuit import MAX_UNITARY_QUBITS, Circuit, Gate, Op, gate_unitary
from .errors import CapacityError, NumericsError
from .numerics import (
    ITERATIVE_TOL,
    check_unitary,
    dagger,
    eig_unitary,
    project_su2,
)
from .skd import SkdResult, solovay_kitaev

_ZERO_ANGLE = 1e-12
_SQRT_HALF = math.sqrt(0.5)
_LOWERED = ("H", "T", "Tdg", "CX")


# ---------------------------------------------------------------------------
# cosine-sine decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CsdFactors:
    """``U = diag(L1, L2) [[C, -S], [S, C]] diag(R1, R2)^dagger``."""

    L1: np.ndarray
    L2: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    C: np.ndarray
    S: np.ndarray

    def assemble(self) -> np.ndarray:
        m = self.C.size
        z = np.zeros((m, m), dtype=complex)
        left = np.block([[self.L1, z], [z, self.L2]])
        mid = np.block([[np.diag(self.C), -np.diag(self.S)], [np.diag(self.S), np.diag(self.C)]])
        right = np.block([[self.R1, z], [z, self.R2]])
        return left @ mid @ dagger(right)


def cosine_sine_decompose(u, tol: float = ITERATIVE_TOL) -> CsdFactors:
    """Cosine-sine decomposition of an even-dimensional unitary.

    ``R1`` comes from the SVD of the top-left block, refined on the columns
    with cosine above ``1/sqrt(2)`` by an SVD of the bottom-left block, and
    each of its columns is rotated so its first nonzero entry is real and
    nonnegative. ``C`` and ``S`` are the column norms of ``U00 R1`` and
    ``U10 R1`` (``C`` descending). ``L2`` is the orthonormalised ``U10 R1``
    (largest ``S`` columns first), and ``R2`` follows from the remaining blocks
    without dividing by ``S`` or ``C``.

    Raises:
        NumericsError: for odd dimensions or if the reassembly residual
            exceeds ``tol``.
    """
    u = check_unitary(u)
    n = u.shape[0]
    if n % 2:
        raise NumericsError(f"cosine-sine decomposition needs an even dimension, got {n}")
    m = n // 2
    u00, u01, u10, u11 = u[:m, :m], u[:m, m:], u[m:, :m], u[m:, m:]

    w, c, vh = np.linalg.svd(u00)
    r1 = dagger(vh)
    # Cosines clustered near one are not resolved by the SVD of U00, so the
    # right factor on that block is re-derived from the SVD of U10, whose
    # (small) singular values are well separated.
    big = c > _SQRT_HALF
    if big.any():
        _, _, xh = np.linalg.svd(u10 @ r1[:, big])
        r1[:, big] = r1[:, big] @ dagger(xh)[:, ::-1]
    ph = np.ones(m, dtype=complex)
    for j in range(m):
        col = r1[:, j]
        k = int(np.flatnonzero(np.abs(col) > 1e-12)[0])
        ph[j] = np.conj(col[k]) / abs(col[k])
    r1 = r1 * ph
    y = u00 @ r1  # = L1 C
    c = np.clip(np.linalg.norm(y, axis=0), 0.0, 1.0)
    l1 = w * ph
    l1[:, big] = y[:, big] / c[big]
    x = u10 @ r1  # = L2 S, columns orthogonal with norms s
    # sqrt(1 - c^2) loses half the digits when c is near 1; the column norms do not
    s = np.linalg.norm(x, axis=0)
    order = np.argsort(-s, kind="stable")
    q, rq = np.linalg.qr(x[:, order], mode="complete")
    d = np.diag(rq).copy()
    ph = np.where(np.abs(d) > 1e-300, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    q = q * ph
    l2 = np.empty_like(q)
    l2[:, order] = q

    r2 = dagger(-np.diag(s) @ dagger(l1) @ u01 + np.diag(c) @ dagger(l2) @ u11)
    f = CsdFactors(l1, l2, r1, r2, c, s)
    resid = np.linalg.norm(f.assemble() - u)
    if resid > tol:
        raise NumericsError(f"cosine-sine decomposition residual {resid:.3e} exceeds {tol:.0e}")
    return f


# ---------------------------------------------------------------------------
# demultiplexing and multiplexed rotations
# ---------------------------------------------------------------------------

def demultiplex(a1, a2, tol: float = ITERATIVE_TOL) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Factor ``A1 = P L Q`` and ``A2 = P L^dagger Q`` with ``L = diag(exp(i theta/2))``.

    ``P`` diagonalises ``A1 A2^dagger = P L^2 P^dagger``; ``Q = L P^dagger A2``.

    Returns:
        ``(P, theta, Q)``.
    """
    a1 = check_unitary(a1)
    a2 = check_unitary(a2)
    if a1.shape != a2.shape:
        raise NumericsError(f"demultiplex needs equal shapes, got {a1.shape} and {a2.shape}")
    lam2, p = eig_unitary(a1 @ dagger(a2), tol)
    theta = np.angle(lam2)
    lam = np.exp(0.5j * theta)
    q = lam[:, None] * (dagger(p) @ a2)
    resid = max(np.linalg.norm(p @ (lam[:, None] * q) - a1), np.linalg.norm(p @ (np.conj(lam)[:, None] * q) - a2))
    if resid > tol:
        raise NumericsError(f"demultiplex residual {resid:.3e} exceeds {tol:.0e}")
    return p, theta, q


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def multiplexed_rotation(kind: str, angles, target: int, controls) -> list[Op]:
    """Ops applying ``R(angles[x])`` to ``target`` when the controls read ``x``.

    ``x`` is read big-endian over ``controls``. Uses ``2**k`` rotations and
    ``2**k`` CX gates (for ``k > 0`` controls), walking a Gray code so each CX
    flips the sign the rotation sees for one control bit.
    """
    angles = np.asarray(angles, dtype=float)
    controls = list(controls)
    k = len(controls)
    if angles.size != 1 << k:
        raise ValueError(f"{k} controls need {1 << k} angles, got {angles.size}")
    if k == 0:
        a = float(angles[0])
        return [] if abs(a) < _ZERO_ANGLE else [Op(Gate(kind, (a,)), (target,))]
    size = 1 << k
    xs = np.arange(size)
    grays = np.array([_gray(i) for i in range(size)])
    parity = np.array([[bin(int(x) & int(g)).count("1") & 1 for g in grays] for x in xs])
    m = 1 - 2 * parity  # m[x, i] = (-1)^{x . gray(i)}
    alphas = m.T @ angles / size
    if np.all(np.abs(alphas) < _ZERO_ANGLE):
        return []  # the CX ladder alone multiplies to the identity
    ops: list[Op] = []
    for i in range(size):
        a = float(alphas[i])
        if abs(a) >= _ZERO_ANGLE:
            ops.append(Op(Gate(kind, (a,)), (target,)))
        bit = (_gray(i) ^ _gray((i + 1) % size)).bit_length() - 1
        ops.append(Op(Gate("CX"), (controls[k - 1 - bit], target)))
    return ops


# ---------------------------------------------------------------------------
# single- and two-qubit blocks
# ---------------------------------------------------------------------------

def _wrap(a: float) -> float:
    a = math.remainder(a, 2 * math.pi)
    return math.pi if a == -math.pi else a


def euler_zyz(u) -> tuple[float, float, float]:
    """Angles with ``RZ(alpha) RY(beta) RZ(gamma) = U`` up to global phase.

    ``beta`` lies in ``[0, pi]``; ``alpha`` and ``gamma`` in ``(-pi, pi]``.
    When ``beta`` is 0 or pi only one of the outer angles matters and
    ``gamma`` is set to 0.
    """
    s = project_su2(u)
    a, b = s[0, 0], s[1, 0]
    beta = 2.0 * math.atan2(abs(b), abs(a))
    if abs(b) < 1e-12:
        alpha, gamma = -2.0 * np.angle(a), 0.0
    elif abs(a) < 1e-12:
        alpha, gamma = 2.0 * np.angle(b), 0.0
    else:
        alpha = np.angle(b) - np.angle(a)
        gamma = -np.angle(a) - np.angle(b)
    return _wrap(float(alpha)) + 0.0, beta, _wrap(float(gamma)) + 0.0


def _one_qubit_ops(u, qubit: int) -> list[Op]:
    alpha, beta, gamma = euler_zyz(u)
    if max(abs(alpha + gamma), abs(beta)) < _ZERO_ANGLE and abs(alpha) < _ZERO_ANGLE:
        return []
    return [Op(Gate("U3", (beta, alpha, gamma)), (qubit,))]


_MAGIC = np.array([[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex) / math.sqrt(2)
_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PAULI_Z = np.diag([1.0, -1.0]).astype(complex)
# eigenvalues of XX, YY, ZZ on the magic-basis columns
_MAGIC_SPECTRUM = np.array(
    [np.real(np.diag(dagger(_MAGIC) @ np.kron(p, p) @ _MAGIC)) for p in (_PAULI_X, _PAULI_Y, _PAULI_Z)]
).T


def _split_local(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor a 4x4 ``A = A0 (x) A1`` into its two 2x2 parts (up to phase)."""
    r = a.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    uu, sv, vh = np.linalg.svd(r)
    a0 = math.sqrt(sv[0]) * uu[:, 0].reshape(2, 2)
    a1 = math.sqrt(sv[0]) * vh[0, :].reshape(2, 2)
    if np.linalg.norm(np.kron(a0, a1) - a) > 1e-8:
        raise NumericsError("matrix is not a tensor product of single-qubit gates")
    return a0, a1


def _simultaneous_real_diag(m: np.ndarray) -> np.ndarray:
    """Real orthogonal P with P^T M P diagonal for a symmetric unitary M."""
    re, im = m.real, m.imag
    rng = np.random.default_rng(20240917)
    for _ in range(16):
        t = rng.uniform(0.1, 1.0)
        _, p = np.linalg.eigh(t * re + (1 - t) * im)
        d = p.T @ m @ p
        if np.linalg.norm(d - np.diag(np.diag(d))) < 1e-9:
            if np.linalg.det(p) < 0:
                p[:, 0] = -p[:, 0]
            return p
    raise NumericsError("could not diagonalise the symmetric unitary in the magic basis")


def two_qubit_ops(u, q0: int = 0, q1: int = 1) -> list[Op]:
    """At most three CX plus U3 gates realising a 4x4 unitary on ``(q0, q1)``.

    ``U ~ (A0 x A1) exp(i(a XX + b YY + c ZZ)) (B0 x B1)`` by diagonalising
    ``Up^T Up`` in the magic basis; the middle factor uses a fixed three-CX
    template.
    """
    u = check_unitary(u)
    if u.shape != (4, 4):
        raise NumericsError(f"expected a 4x4 unitary, got {u.shape}")
    su = u / np.linalg.det(u) ** 0.25
    up = dagger(_MAGIC) @ su @ _MAGIC
    p = _simultaneous_real_diag(up.T @ up)
    dsq = np.diag(p.T @ up.T @ up @ p)
    d = np.sqrt(dsq)
    k1 = up @ p @ np.diag(1 / d)
    if np.linalg.det(k1).real < 0:
        d[0] = -d[0]
        k1[:, 0] = -k1[:, 0]
    k2 = p.T
    # phases of d = g + spectrum . (a, b, c)
    sol = np.linalg.solve(np.c_[np.ones(4), _MAGIC_SPECTRUM], np.angle(d))
    _, a, b, c = sol
    left = _MAGIC @ k1 @ dagger(_MAGIC)
    right = _MAGIC @ k2 @ dagger(_MAGIC)
    a0, a1 = _split_local(left)
    b0, b1 = _split_local(right)

    if max(abs(math.sin(a)), abs(math.sin(b)), abs(math.sin(c))) < 1e-12 and max(
        abs(math.cos(a)), abs(math.cos(b)), abs(math.cos(c))
    ) > 0:
        # the core is (up to phase) a product of Paulis; fold everything local
        core = _core_matrix(a, b, c)
        total = np.kron(a0, a1) @ core @ np.kron(b0, b1)
        l0, l1 = _split_local(total)
        return _one_qubit_ops(l0, q0) + _one_qubit_ops(l1, q1)

    ops = _one_qubit_ops(b0, q0) + _one_qubit_ops(b1, q1)
    ops += _core_ops(a, b, c, q0, q1)
    ops += _one_qubit_ops(a0, q0) + _one_qubit_ops(a1, q1)
    return ops


def _core_matrix(a, b, c) -> np.ndarray:
    h = a * np.kron(_PAULI_X, _PAULI_X) + b * np.kron(_PAULI_Y, _PAULI_Y) + c * np.kron(_PAULI_Z, _PAULI_Z)
    w, v = np.linalg.eigh(h)
    return v @ np.diag(np.exp(1j * w)) @ dagger(v)


def _core_ops(a: float, b: float, c: float, q0: int, q1: int) -> list[Op]:
    """Three-CX circuit for ``exp(i(a XX + b YY + c ZZ))`` up to global phase."""
    half = math.pi / 2
    return [
        Op(Gate("RZ", (half,)), (q1,)),
        Op(Gate("CX"), (q1, q0)),
        Op(Gate("RZ", (half - 2 * c,)), (q0,)),
        Op(Gate("RY", (half - 2 * a,)), (q1,)),
        Op(Gate("CX"), (q0, q1)),
        Op(Gate("RY", (2 * b - half,)), (q1,)),
        Op(Gate("CX"), (q1, q0)),
        Op(Gate("RZ", (-half,)), (q0,)),
    ]


# ---------------------------------------------------------------------------
# recursion
# ---------------------------------------------------------------------------

def _qsd_ops(u: np.ndarray, qubits: list[int]) -> list[Op]:
    n = len(qubits)
    if n == 1:
        return _one_qubit_ops(u, qubits[0])
    if n == 2:
        return two_qubit_ops(u, qubits[0], qubits[1])
    f = cosine_sine_decompose(u)
    top, rest = qubits[0], qubits[1:]
    p_r, th_r, q_r = demultiplex(dagger(f.R1), dagger(f.R2))
    p_l, th_l, q_l = demultiplex(f.L1, f.L2)
    ry_angles = 2.0 * np.arctan2(f.S, f.C)
    ops = _qsd_ops(q_r, rest)
    ops += multiplexed_rotation("RZ", -th_r, top, rest)
    ops += _qsd_ops(p_r, rest)
    ops += multiplexed_rotation("RY", ry_angles, top, rest)
    ops += _qsd_ops(q_l, rest)
    ops += multiplexed_rotation("RZ", -th_l, top, rest)
    ops += _qsd_ops(p_l, rest)
    return ops


def qsd_decompose(u) -> Circuit:
    """Circuit over {U3, RY, RZ, CX} equal to ``U`` up to global phase.

    Raises:
        NumericsError: if ``U`` is not unitary or its size is not a power of two.
        CapacityError: beyond six qubits.
    """
    u = check_unitary(u)
    dim = u.shape[0]
    n = dim.bit_length() - 1
    if dim < 2 or dim != 1 << n:
        raise NumericsError(f"dimension {dim} is not a power of two >= 2")
    if n > MAX_UNITARY_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the decomposition limit of {MAX_UNITARY_QUBITS}")
    return Circuit(n, tuple(_qsd_ops(u, list(range(n)))))


# ---------------------------------------------------------------------------
# lowering to the discrete gate set
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LoweringResult:
    circuit: Circuit
    error_bound: float
    gate_errors: tuple[float, ...] = ()


def lower_circuit(c: Circuit, basis: SKBasis, n: int, simplify: bool = True, cache: dict | None = None) -> LoweringResult:
    """Replace every non-CX single-qubit gate by its Solovay-Kitaev word.

    H, T and Tdg pass through unchanged, as does CX. ``error_bound`` is the sum
    of the per-gate approximation errors, which bounds the distance of the
    whole circuit from the original.
    """
    cache = {} if cache is None else cache
    ops: list[Op] = []
    errors: list[float] = []
    for op in c.ops:
        g = op.gate
        if g.arity > 2:
            raise ValueError(f"gate {g.kind} acts on {g.arity} qubits; only 1- and 2-qubit gates are supported")
        if g.kind in _LOWERED:
            ops.append(op)
            continue
        key = (g, n, simplify, id(basis))
        res: SkdResult | None = cache.get(key)
        if res is None:
            res = solovay_kitaev(project_su2(gate_unitary(g)), n, basis, simplify=simplify)
            cache[key] = res
        errors.append(res.error)
        q = op.qubits[0]
        ops.extend(Op(Gate(name), (q,)) for name in res.sequence)
    return LoweringResult(Circuit(c.num_qubits, tuple(ops)), float(sum(errors)), tuple(errors))
