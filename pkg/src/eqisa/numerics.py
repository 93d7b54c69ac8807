"""Dense complex-matrix helpers for small unitaries.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. Functions
that require a unitary check it with :func:`check_unitary` and raise
:class:`~eqisa.errors.NumericsError` otherwise.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .errors import NumericsError

UNITARY_TOL = 1e-10
ITERATIVE_TOL = 1e-8
MAX_DIM = 64
GRID_POINTS = 4096

IDENTITY2 = np.eye(2, dtype=complex)


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NumericsError(f"expected a nonempty square matrix, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def unitarity_residual(m: np.ndarray) -> float:
    """Frobenius norm of ``m m^dagger - I``."""
    m = as_matrix(m)
    return float(np.linalg.norm(m @ dagger(m) - np.eye(m.shape[0])))


def is_unitary(m, tol: float = UNITARY_TOL) -> bool:
    try:
        return unitarity_residual(m) < tol
    except NumericsError:
        return False


def check_unitary(m, tol: float = UNITARY_TOL) -> np.ndarray:
    a = as_matrix(m)
    r = unitarity_residual(a)
    if not r < tol:
        raise NumericsError(f"matrix is not unitary (residual {r:.3e} >= {tol:.0e})")
    return a


def nearest_unitary(m) -> np.ndarray:
    """Unitary polar factor of ``m``: the closest unitary in Frobenius norm.

    Useful for matrices printed to a few decimals, which are unitary only to
    that precision.
    """
    w, _, vh = np.linalg.svd(as_matrix(m))
    return w @ vh


def haar_random_unitary(dim: int, seed=None) -> np.ndarray:
    """Sample a Haar-distributed unitary.

    Uses the QR factorisation of a complex Gaussian matrix, with the phases of
    R's diagonal pushed into Q so the result is distributed uniformly.

    Args:
        dim: Matrix dimension, at least 1.
        seed: Anything accepted by ``numpy.random.default_rng`` (an int, or a
            ``Generator`` to draw from).
    """
    if int(dim) < 1:
        raise NumericsError(f"invalid dimension {dim}; must be >= 1")
    dim = int(dim)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_random_su2(seed=None) -> np.ndarray:
    return project_su2(haar_random_unitary(2, seed))


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------

def _eigenphase_distance(u: np.ndarray, v: np.ndarray) -> float:
    # min_phi ||U - e^{i phi} V|| = min_phi max_k |e^{i t_k} - e^{i phi}| where
    # e^{i t_k} are the eigenvalues of V^dagger U. The optimal phi sits in the
    # middle of the shortest arc covering all eigenphases.
    w = np.linalg.eigvals(dagger(v) @ u)
    t = np.sort(np.mod(np.angle(w), 2 * math.pi))
    gaps = np.diff(np.r_[t, t[0] + 2 * math.pi])
    arc = 2 * math.pi - gaps.max()
    return 2.0 * math.sin(arc / 4.0)


def phase_aligned_distance(u, v) -> float:
    """Operator-norm distance between two unitaries, minimised over global phase.

    Computes ``min_phi ||U - exp(i phi) V||_2``. For 2x2 inputs the value comes
    from the quaternion form (accurate close to zero); larger matrices use the
    eigenphases of ``V^dagger U``.

    Raises:
        NumericsError: if the shapes differ.
    """
    u = as_matrix(u)
    v = as_matrix(v)
    if u.shape != v.shape:
        raise NumericsError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if u.shape[0] == 1:
        return 0.0
    if u.shape[0] == 2:
        return quaternion_distance(to_quaternion(u), to_quaternion(v))
    return _eigenphase_distance(u, v)


def grid_phase_distance(u, v, points: int = GRID_POINTS) -> float:
    """Brute-force phase minimisation over a uniform grid (reference method)."""
    u = as_matrix(u)
    v = as_matrix(v)
    if u.shape != v.shape:
        raise NumericsError(f"dimension mismatch: {u.shape} vs {v.shape}")
    best = np.inf
    for phi in np.linspace(0.0, 2 * math.pi, points, endpoint=False):
        best = min(best, np.linalg.norm(u - np.exp(1j * phi) * v, 2))
    return float(best)


# ---------------------------------------------------------------------------
# SU(2)
# ---------------------------------------------------------------------------

def _canonical_sign(m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    re = m[0, 0].real
    if re < -tol:
        return -m
    if abs(re) <= tol:
        for z in m.ravel():
            if abs(z) > tol:
                if z.real < -tol or (abs(z.real) <= tol and z.imag < 0):
                    return -m
                break
    return m


def project_su2(u, tol: float = UNITARY_TOL) -> np.ndarray:
    """Rescale a 2x2 unitary to determinant one.

    The two square roots of ``det U`` give ``±`` results; the one whose (0, 0)
    entry has nonnegative real part is returned (ties fall to the first
    nonzero entry), so the map is idempotent.
    """
    u = check_unitary(u, tol)
    if u.shape != (2, 2):
        raise NumericsError(f"project_su2 needs a 2x2 matrix, got {u.shape}")
    s = u / np.sqrt(np.linalg.det(u))
    return _canonical_sign(s)


def is_su2(m, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(m, dtype=complex)
    return m.shape == (2, 2) and is_unitary(m, tol) and abs(np.linalg.det(m) - 1) < tol


def to_quaternion(u) -> np.ndarray:
    """Unit quaternion of the SU(2) projection of a 2x2 unitary.

    Convention: ``U = q0 I - i (q1 X + q2 Y + q3 Z)``. The overall sign is
    arbitrary; distances treat ``q`` and ``-q`` as the same rotation.
    """
    u = np.asarray(u, dtype=complex)
    det = np.linalg.det(u)
    s = u / np.sqrt(det)
    q = np.array([s[0, 0].real, -s[1, 0].imag, s[1, 0].real, -s[0, 0].imag])
    return q / np.linalg.norm(q)


def from_quaternion(q) -> np.ndarray:
    q0, q1, q2, q3 = (float(x) for x in q)
    return np.array([[q0 - 1j * q3, -q2 - 1j * q1], [q2 - 1j * q1, q0 + 1j * q3]])


def quaternion_distance(p, q) -> float:
    # V^dagger U has eigenphases +-theta/2 with cos(theta/2) = p.q, so the
    # phase-minimised norm 2 sin(arc/4) equals |p - q| or |p + q|, whichever is
    # smaller. This form keeps full relative precision near zero.
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(min(np.linalg.norm(p - q), np.linalg.norm(p + q)))


def rotation_angle(u) -> float:
    """Rotation angle in [0, pi] of a 2x2 unitary, ignoring global phase."""
    q = to_quaternion(u)
    return 2.0 * math.acos(min(1.0, abs(q[0])))


# ---------------------------------------------------------------------------
# eigendecomposition
# ---------------------------------------------------------------------------

def eig_unitary(u, tol: float = ITERATIVE_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and an orthonormal eigenbasis of a unitary.

    A unitary is normal, so its complex Schur form is diagonal and the Schur
    vectors are eigenvectors. The off-diagonal part of the Schur factor is
    checked against ``tol``.

    Returns:
        ``(eigenvalues, V)`` with ``U = V diag(eigenvalues) V^dagger``.
    """
    u = check_unitary(u, max(tol, UNITARY_TOL))
    try:
        t, z = scipy.linalg.schur(u, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:  # pragma: no cover
        raise NumericsError(f"Schur iteration failed to converge: {exc}") from exc
    off = np.linalg.norm(np.triu(t, 1))
    if off > tol * max(1.0, u.shape[0]):
        raise NumericsError(f"Schur form not diagonal (off-diagonal norm {off:.3e})")
    lam = np.diag(t).copy()
    lam /= np.abs(lam)
    return lam, z


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

def format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}j"


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace("i", "j"))
    except ValueError as exc:
        raise NumericsError(f"bad complex literal {text!r}") from exc


def matrix_to_text(m) -> str:
    m = as_matrix(m)
    lines = [f"dim {m.shape[0]}"]
    for row in m:
        lines.append(" ".join(format_complex(z) for z in row))
    return "\n".join(lines) + "\n"


def matrix_from_text(text: str) -> np.ndarray:
    lines = [ln for ln in (s.strip() for s in text.splitlines()) if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith("dim"):
        raise NumericsError("matrix text must start with 'dim N'")
    try:
        n = int(lines[0].split()[1])
    except (IndexError, ValueError) as exc:
        raise NumericsError(f"bad header {lines[0]!r}") from exc
    rows = [[parse_complex(tok) for tok in ln.split()] for ln in lines[1:]]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise NumericsError(f"expected {n}x{n} entries")
    return np.array(rows, dtype=complex)
