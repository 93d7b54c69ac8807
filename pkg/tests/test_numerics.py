import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eqisa.errors import NumericsError
from eqisa.numerics import (
    dagger,
    eig_unitary,
    grid_phase_distance,
    haar_random_su2,
    haar_random_unitary,
    is_su2,
    matrix_from_text,
    matrix_to_text,
    phase_aligned_distance,
    project_su2,
    rotation_angle,
    unitarity_residual,
)

from conftest import WORKED_U

H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
T = np.diag([1, np.exp(1j * math.pi / 4)])
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)

seeds = st.integers(0, 2**32 - 1)


def test_haar_dim_one_is_unit_phase():
    u = haar_random_unitary(1, 7)
    assert u.shape == (1, 1)
    assert abs(abs(u[0, 0]) - 1) < 1e-14


def test_haar_seed_42_is_unitary_and_reproducible():
    u = haar_random_unitary(2, 42)
    assert np.linalg.norm(u @ dagger(u) - np.eye(2)) < 1e-10
    assert np.array_equal(u, haar_random_unitary(2, 42))


def test_haar_rejects_zero_dim():
    with pytest.raises(NumericsError):
        haar_random_unitary(0, 1)


def test_worked_matrix_is_unitary_at_printed_precision():
    assert unitarity_residual(WORKED_U) < 1e-7


def test_haar_second_moment():
    rng = np.random.default_rng(5)
    vals = [abs(np.trace(haar_random_unitary(2, rng))) ** 2 / 4 for _ in range(1000)]
    assert abs(np.mean(vals) - 0.25) < 0.05


def test_distance_examples():
    assert phase_aligned_distance(H, H) < 1e-15
    assert abs(phase_aligned_distance(np.eye(2), X) - math.sqrt(2)) < 1e-12
    assert abs(grid_phase_distance(np.eye(2), X) - math.sqrt(2)) < 1e-6
    assert phase_aligned_distance(H, T) > 0.5
    assert grid_phase_distance(H, T) > 0.5


def test_distance_dimension_mismatch():
    with pytest.raises(NumericsError):
        phase_aligned_distance(np.eye(2), np.eye(4))


@settings(max_examples=25)
@given(seeds, st.sampled_from([2, 4, 8]))
def test_distance_matches_grid_oracle(seed, dim):
    rng = np.random.default_rng(seed)
    u, v = haar_random_unitary(dim, rng), haar_random_unitary(dim, rng)
    d = phase_aligned_distance(u, v)
    g = grid_phase_distance(u, v, 4096)
    # the grid can only overshoot the true minimum, by at most the grid step
    assert d <= g + 1e-9
    assert g - d < 2 * math.pi / 4096


@given(seeds)
def test_distance_phase_invariant_and_symmetric(seed):
    rng = np.random.default_rng(seed)
    u, v = haar_random_unitary(4, rng), haar_random_unitary(4, rng)
    ph = np.exp(1j * rng.uniform(0, 2 * math.pi))
    assert abs(phase_aligned_distance(u, v) - phase_aligned_distance(v, u)) < 1e-9
    assert abs(phase_aligned_distance(u, ph * v) - phase_aligned_distance(u, v)) < 1e-9
    assert phase_aligned_distance(u, ph * u) < 1e-7


@given(seeds, st.sampled_from([2, 4]))
def test_distance_triangle_inequality(seed, dim):
    rng = np.random.default_rng(seed)
    a, b, c = (haar_random_unitary(dim, rng) for _ in range(3))
    assert phase_aligned_distance(a, c) <= phase_aligned_distance(a, b) + phase_aligned_distance(b, c) + 1e-9


def test_project_examples():
    assert np.allclose(project_su2(np.eye(2)), np.eye(2))
    h = project_su2(H)
    assert abs(np.linalg.det(h) - 1) < 1e-12
    assert phase_aligned_distance(h, H) < 1e-12
    t = project_su2(T)
    assert np.allclose(t, np.diag([np.exp(-1j * math.pi / 8), np.exp(1j * math.pi / 8)]), atol=1e-14)


def test_project_rejects_non_unitary():
    with pytest.raises(NumericsError):
        project_su2(np.array([[1, 1], [0, 1]]))


@given(seeds)
def test_project_idempotent(seed):
    u = haar_random_unitary(2, seed)
    p = project_su2(u)
    assert is_su2(p)
    assert np.max(np.abs(project_su2(p) - p)) < 1e-12
    assert phase_aligned_distance(u, p) < 1e-12


def test_rotation_angle():
    assert abs(rotation_angle(np.eye(2))) < 1e-12
    assert abs(rotation_angle(X) - math.pi) < 1e-12


def test_eig_examples():
    lam, v = eig_unitary(np.eye(2))
    assert np.allclose(lam, [1, 1])
    lam, v = eig_unitary(Z)
    assert sorted(np.round(lam.real, 12)) == [-1, 1]


@given(seeds)
def test_eig_reconstructs(seed):
    u = haar_random_unitary(4, seed)
    lam, v = eig_unitary(u)
    assert np.linalg.norm(v @ np.diag(lam) @ dagger(v) - u) < 1e-8
    assert np.allclose(np.abs(lam), 1, atol=1e-8)
    assert unitarity_residual(v) < 1e-8
    assert np.linalg.norm(u @ v - v * lam) < 1e-8


def test_haar_su2_is_su2():
    assert is_su2(haar_random_su2(3))


def test_matrix_text_round_trip(rng):
    u = haar_random_unitary(4, rng)
    text = matrix_to_text(u)
    assert text.startswith("dim 4\n")
    assert np.array_equal(matrix_from_text(text), u)


def test_matrix_text_rejects_bad_shape():
    with pytest.raises(NumericsError):
        matrix_from_text("dim 2\n1+0j 0+0j\n")
