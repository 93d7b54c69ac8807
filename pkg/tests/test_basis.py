import itertools

import numpy as np
import pytest

from eqisa.basis import (
    NULL_LABEL,
    basis_from_text,
    basis_to_text,
    epsilon_zero,
    generate_basis,
    load_basis,
    nearest_element,
    save_basis,
    split_label,
    word_matrix,
)
from eqisa.circuit import gate_unitary, rz
from eqisa.errors import GateSetError
from eqisa.numerics import phase_aligned_distance, project_su2

from conftest import WORKED_U

# The 21 labels of the reference d=3 frequency table (identity excluded).
REFERENCE_D3 = {
    "HTH", "HTdgH", "T", "Tdg", "TH", "H", "HT", "HTdg", "TT", "TdgH", "TdgTdg",
    "HTT", "HTdgTdg", "THT", "THTdg", "TTH", "TTT", "TdgHT", "TdgHTdg", "TdgTdgH", "TdgTdgTdg",
}


def test_d3_matches_reference_labels(basis3):
    assert set(basis3.non_null_labels) == REFERENCE_D3
    assert basis3.labels[0] == NULL_LABEL


def test_d1_is_base_gates():
    assert generate_basis(depth=1).labels == (NULL_LABEL, "H", "T", "Tdg")


def test_d2_survivors_match_brute_force():
    # oracle: all 9 length-2 words, dropping any within 1e-10 of an earlier survivor
    kept = [np.eye(2)] + [word_matrix((g,)) for g in ("H", "T", "Tdg")]
    survivors = []
    for w in itertools.product(("H", "T", "Tdg"), repeat=2):
        m = word_matrix(w)
        if min(phase_aligned_distance(m, k) for k in kept) >= 1e-10:
            kept.append(m)
            survivors.append("".join(w))
    assert set(survivors) == {"HT", "HTdg", "TH", "TT", "TdgH", "TdgTdg"}
    b2 = generate_basis(depth=2)
    assert [lb for lb in b2.non_null_labels if len(split_label(lb)) == 2] == survivors


def test_counts_by_depth():
    assert [len(generate_basis(depth=d).non_null_labels) for d in range(1, 5)] == [3, 9, 21, 44]


def test_rejects_open_gate_set():
    with pytest.raises(GateSetError):
        generate_basis(("H", "T"), 2)
    with pytest.raises(GateSetError):
        generate_basis((), 2)


def test_elements_distinct_and_consistent(basis5):
    q = basis5.quaternions
    for i in range(len(q)):
        d = np.minimum(np.linalg.norm(q[i + 1 :] - q[i], axis=1), np.linalg.norm(q[i + 1 :] + q[i], axis=1))
        assert d.size == 0 or d.min() > basis5.tolerance
    for e in basis5.elements:
        assert len(e.word) <= 5
        assert np.linalg.norm(e.matrix - word_matrix(e.word)) < 1e-10


def test_pruning_is_sound(basis3):
    # every word of length <= 3 is within tolerance of some kept element
    for length in range(4):
        for w in itertools.product(("H", "T", "Tdg"), repeat=length):
            _, d = nearest_element(word_matrix(w), basis3)
            assert d < 1e-10


def test_inverse_closure(basis5):
    for e in basis5.elements:
        _, d = nearest_element(e.matrix.conj().T, basis5)
        assert d < 1e-9


def test_deterministic():
    assert generate_basis(depth=4).same_as(generate_basis(depth=4))


def test_nearest_examples(basis3):
    e = basis3.by_label["THT"]
    found, d = nearest_element(e.matrix, basis3)
    assert found.label == "THT" and d < 1e-12
    target = gate_unitary(rz(1e-6)) @ gate_unitary(rz(np.pi / 4))
    found, d = nearest_element(target, basis3)
    assert found.label == "T" and d < 1e-5


def test_nearest_worked_matrix_is_exhaustive_minimum(basis3):
    u = project_su2(WORKED_U, tol=1e-7)
    found, d = nearest_element(u, basis3)
    scan = [phase_aligned_distance(u, e.matrix) for e in basis3.elements]
    assert d == pytest.approx(min(scan), abs=1e-12)
    assert found is basis3.elements[int(np.argmin(scan))]
    assert 0 < d <= epsilon_zero(basis3, 500, 0)


def test_nearest_tie_prefers_shorter_label(basis3):
    # identity is exactly the null word, also reached by e.g. HH (pruned)
    found, d = nearest_element(np.eye(2), basis3)
    assert found.label == NULL_LABEL and d == 0


def test_epsilon_zero_monotone_in_depth(basis3, basis5):
    e1 = epsilon_zero(generate_basis(depth=1), 500, 0)
    e3 = epsilon_zero(basis3, 500, 0)
    e5 = epsilon_zero(basis5, 500, 0)
    assert e1 >= e3 > e5


def test_net_points_have_zero_distance(basis3):
    for e in basis3.elements:
        assert nearest_element(e.matrix, basis3)[1] < 1e-12


def test_persistence_round_trip(basis3, tmp_path):
    p = tmp_path / "b.txt"
    save_basis(basis3, p)
    again = load_basis(p)
    assert again.same_as(basis3)
    assert basis_to_text(again) == basis_to_text(basis3)


def test_persistence_detects_tampering(basis3):
    text = basis_to_text(basis3).replace("HTH\t", "HTT\t", 1)
    with pytest.raises(ValueError):
        basis_from_text(text)
    with pytest.raises(ValueError):
        basis_from_text("nonsense\n")


def test_split_label():
    assert split_label("TdgHTdg") == ("Tdg", "H", "Tdg")
    assert split_label(NULL_LABEL) == ()
    with pytest.raises(ValueError):
        split_label("HX")
