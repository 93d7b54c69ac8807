import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from eqisa.circuit import Circuit, Gate, Op, circuit_unitary, ry_matrix, rz, rz_matrix
from eqisa.errors import CapacityError, NumericsError
from eqisa.numerics import dagger, haar_random_unitary, nearest_unitary, phase_aligned_distance, project_su2
from eqisa.qsd import (
    cosine_sine_decompose,
    demultiplex,
    euler_zyz,
    lower_circuit,
    multiplexed_rotation,
    qsd_decompose,
    two_qubit_ops,
)

from conftest import WORKED_U

seeds = st.integers(0, 2**32 - 1)


def _cx_count(c: Circuit) -> int:
    return sum(op.gate.kind == "CX" for op in c.ops)


def test_csd_identity_and_block_diagonal():
    f = cosine_sine_decompose(np.eye(4))
    assert np.allclose(f.S, 0) and np.allclose(f.C, 1)
    a, b = haar_random_unitary(2, 1), haar_random_unitary(2, 2)
    f = cosine_sine_decompose(scipy.linalg.block_diag(a, b))
    assert np.allclose(f.S, 0, atol=1e-12)
    assert np.linalg.norm(f.assemble() - scipy.linalg.block_diag(a, b)) < 1e-12
    assert np.allclose(f.L1 @ dagger(f.R1), a) and np.allclose(f.L2 @ dagger(f.R2), b)


def test_csd_swapped_blocks_have_unit_sines():
    x = np.kron(np.array([[0, 1], [1, 0]]), np.eye(2))
    f = cosine_sine_decompose(x)
    assert np.allclose(f.S, 1) and np.allclose(f.C, 0, atol=1e-12)
    assert np.linalg.norm(f.assemble() - x) < 1e-12


@settings(max_examples=30)
@given(seeds, st.sampled_from([2, 4, 8]))
def test_csd_reassembles(seed, dim):
    u = haar_random_unitary(dim, seed)
    f = cosine_sine_decompose(u)
    assert np.linalg.norm(f.assemble() - u) < 1e-10
    assert np.allclose(f.C**2 + f.S**2, 1, atol=1e-12)
    assert np.all(np.diff(f.C) <= 1e-12)
    for m in (f.L1, f.L2, f.R1, f.R2):
        assert np.allclose(m @ dagger(m), np.eye(dim // 2), atol=1e-10)


@settings(max_examples=20)
@given(seeds)
def test_csd_angles_match_scipy(seed):
    # independent route: LAPACK's CS decomposition
    u = haar_random_unitary(8, seed)
    f = cosine_sine_decompose(u)
    _, theta, _ = scipy.linalg.cossin(u, p=4, q=4, separate=True)
    assert np.allclose(np.sort(f.C), np.sort(np.cos(theta)), atol=1e-10)


def test_csd_rejects_odd_dimension():
    with pytest.raises(NumericsError):
        cosine_sine_decompose(np.eye(3))


def test_csd_degenerate_near_identity():
    # cosines within 1e-9 of one used to lose the sine to cancellation
    u = scipy.linalg.expm(1j * 1e-9 * (lambda h: h + dagger(h))(haar_random_unitary(8, 7)))
    f = cosine_sine_decompose(u)
    assert np.linalg.norm(f.assemble() - u) < 1e-12


def test_demultiplex_equal_blocks():
    a = haar_random_unitary(4, 3)
    p, theta, q = demultiplex(a, a)
    assert np.allclose(theta, 0, atol=1e-10)
    assert np.linalg.norm(p @ q - a) < 1e-10


def test_demultiplex_z_against_identity():
    z = np.diag([1.0, -1.0]).astype(complex)
    p, theta, q = demultiplex(z, np.eye(2))
    assert sorted(np.round(np.abs(theta), 12)) == pytest.approx([0.0, math.pi])


@settings(max_examples=30)
@given(seeds, seeds)
def test_demultiplex_random(s1, s2):
    a1, a2 = haar_random_unitary(4, s1), haar_random_unitary(4, s2)
    p, theta, q = demultiplex(a1, a2)
    lam = np.diag(np.exp(0.5j * theta))
    assert np.linalg.norm(p @ lam @ q - a1) < 1e-10
    assert np.linalg.norm(p @ dagger(lam) @ q - a2) < 1e-10


@settings(max_examples=30)
@given(st.integers(0, 3), st.lists(st.floats(-math.pi, math.pi), min_size=8, max_size=8))
def test_multiplexed_rotation_matches_block_diagonal(k, raw):
    for kind, mat in (("RZ", rz_matrix), ("RY", ry_matrix)):
        angles = np.array(raw[: 1 << k])
        ops = multiplexed_rotation(kind, angles, 0, list(range(1, k + 1)))
        circ = Circuit(k + 1, tuple(ops))
        # target is the most significant qubit, so the matrix is [[R_00, R_01], [R_10, R_11]]
        want = np.zeros((2 << k, 2 << k), dtype=complex)
        size = 1 << k
        for x, a in enumerate(angles):
            r = mat(a)
            for i in range(2):
                for j in range(2):
                    want[i * size + x, j * size + x] = r[i, j]
        assert np.linalg.norm(circuit_unitary(circ) - want) < 1e-10
        if k:
            assert sum(op.gate.kind == "CX" for op in ops) in (0, 1 << k)


@pytest.mark.parametrize(
    "u, angles",
    [
        (np.eye(2), (0.0, 0.0, 0.0)),
        (rz_matrix(0.7), (0.7, 0.0, 0.0)),
        (ry_matrix(1.1), (0.0, 1.1, 0.0)),
        (rz_matrix(0.3) @ ry_matrix(0.5) @ rz_matrix(-0.2), (0.3, 0.5, -0.2)),
    ],
)
def test_euler_zyz_examples(u, angles):
    assert euler_zyz(u) == pytest.approx(angles, abs=1e-12)


def test_euler_zyz_worked_matrix():
    u = project_su2(nearest_unitary(WORKED_U))
    a, b, g = euler_zyz(u)
    assert phase_aligned_distance(rz_matrix(a) @ ry_matrix(b) @ rz_matrix(g), u) < 1e-10


@settings(max_examples=50)
@given(seeds)
def test_euler_zyz_reconstructs(seed):
    u = haar_random_unitary(2, seed)
    a, b, g = euler_zyz(u)
    assert 0 <= b <= math.pi and -math.pi < a <= math.pi and -math.pi < g <= math.pi
    assert phase_aligned_distance(rz_matrix(a) @ ry_matrix(b) @ rz_matrix(g), u) < 1e-10


@settings(max_examples=40)
@given(seeds)
def test_two_qubit_random_uses_at_most_three_cx(seed):
    u = haar_random_unitary(4, seed)
    circ = Circuit(2, tuple(two_qubit_ops(u)))
    assert _cx_count(circ) <= 3
    assert phase_aligned_distance(circuit_unitary(circ), u) < 1e-9


def test_two_qubit_local_product_has_no_cx():
    u = np.kron(haar_random_unitary(2, 4), haar_random_unitary(2, 5))
    circ = Circuit(2, tuple(two_qubit_ops(u)))
    assert _cx_count(circ) == 0
    assert phase_aligned_distance(circuit_unitary(circ), u) < 1e-9


@pytest.mark.parametrize("n", [1, 2, 3])
def test_qsd_identity(n):
    circ = qsd_decompose(np.eye(1 << n))
    assert phase_aligned_distance(circuit_unitary(circ), np.eye(1 << n)) < 1e-10
    if n <= 2:
        assert circ.ops == ()


def test_qsd_cx():
    cx = circuit_unitary(Circuit(2, (Op(Gate("CX"), (0, 1)),)))
    circ = qsd_decompose(cx)
    assert _cx_count(circ) <= 3
    assert phase_aligned_distance(circuit_unitary(circ), cx) < 1e-10


@settings(max_examples=10)
@given(seeds, st.integers(1, 4))
def test_qsd_random(seed, n):
    u = haar_random_unitary(1 << n, seed)
    circ = qsd_decompose(u)
    assert circ.num_qubits == n
    assert {op.gate.kind for op in circ.ops} <= {"U3", "RY", "RZ", "CX"}
    assert phase_aligned_distance(circuit_unitary(circ), u) < 1e-9
    if n == 2:
        assert _cx_count(circ) <= 3


def test_qsd_limits():
    with pytest.raises(CapacityError):
        qsd_decompose(np.eye(1 << 7))
    with pytest.raises(NumericsError):
        qsd_decompose(np.eye(6))
    with pytest.raises(NumericsError):
        qsd_decompose(np.ones((4, 4)))


def test_lower_circuit_single_t(basis3):
    c = Circuit(1, (Op(Gate("T"), (0,)),))
    assert lower_circuit(c, basis3, 2).circuit == c
    # also when it arrives as a rotation: RZ(pi/4) is T up to phase
    res = lower_circuit(Circuit(1, (Op(rz(math.pi / 4), (0,)),)), basis3, 2)
    assert [op.gate.kind for op in res.circuit.ops] == ["T"]
    assert res.error_bound < 1e-12


def test_lower_circuit_passes_discrete_gates(basis3):
    c = Circuit(2, (Op(Gate("CX"), (0, 1)), Op(Gate("T"), (1,)), Op(Gate("H"), (0,))))
    res = lower_circuit(c, basis3, 2)
    assert res.circuit == c
    assert res.error_bound == 0.0


def test_lower_circuit_rotation_error_bound(basis3):
    c = Circuit(2, (Op(rz(0.3), (0,)), Op(Gate("CX"), (0, 1))))
    res = lower_circuit(c, basis3, 2)
    assert {op.gate.kind for op in res.circuit.ops} <= {"H", "T", "Tdg", "CX"}
    assert res.circuit.ops[-1] == Op(Gate("CX"), (0, 1))
    assert len(res.gate_errors) == 1
    dist = phase_aligned_distance(circuit_unitary(res.circuit), circuit_unitary(c))
    assert dist <= res.error_bound + 1e-12


@settings(max_examples=10)
@given(seeds)
def test_lowering_error_is_subadditive(basis3, seed):
    rng = np.random.default_rng(seed)
    ops = []
    for _ in range(5):
        q = int(rng.integers(3))
        ops.append(Op(Gate("U3", tuple(rng.uniform(-math.pi, math.pi, 3))), (q,)))
        ops.append(Op(Gate("CX"), (q, (q + 1) % 3)))
    c = Circuit(3, tuple(ops))
    res = lower_circuit(c, basis3, 1)
    assert res.error_bound == pytest.approx(sum(res.gate_errors))
    assert phase_aligned_distance(circuit_unitary(res.circuit), circuit_unitary(c)) <= res.error_bound + 1e-9
