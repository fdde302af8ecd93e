import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qiprune.linalg import (
    apply_gate,
    haar_unitary,
    n_qubits_of,
    operator_norm,
    pure_trace_distance,
    random_state,
    unitarity_deviation,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def basis(n_qubits, index):
    s = np.zeros(1 << n_qubits, dtype=complex)
    s[index] = 1.0
    return s


class TestApplyGate:
    def test_identity_leaves_state_unchanged(self):
        rng = np.random.default_rng(7)
        psi = random_state(3, rng)
        for wire in range(3):
            out = apply_gate(psi, np.eye(2, dtype=complex), [wire])
            np.testing.assert_allclose(out, psi, atol=1e-14)

    def test_x_on_qubit0_flips_most_significant_bit(self):
        out = apply_gate(basis(2, 0b00), X, [0])
        np.testing.assert_allclose(out, basis(2, 0b10), atol=1e-14)

    def test_hadamard_on_single_qubit(self):
        out = apply_gate(basis(1, 0), H, [0])
        np.testing.assert_allclose(out, np.array([1, 1]) / math.sqrt(2), atol=1e-14)
        assert abs(np.linalg.norm(out) - 1.0) <= 1e-10

    def test_norm_preserved_for_random_unitaries(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            n = int(rng.integers(1, 5))
            k = int(rng.integers(1, min(n, 2) + 1))
            wires = list(rng.choice(n, size=k, replace=False))
            psi = random_state(n, rng)
            out = apply_gate(psi, haar_unitary(1 << k, rng), wires)
            assert abs(np.linalg.norm(out) - 1.0) <= 1e-10

    def test_disjoint_wires_commute(self):
        rng = np.random.default_rng(3)
        psi = random_state(2, rng)
        a, b = haar_unitary(2, rng), haar_unitary(2, rng)
        ab = apply_gate(apply_gate(psi, a, [0]), b, [1])
        ba = apply_gate(apply_gate(psi, b, [1]), a, [0])
        np.testing.assert_allclose(ab, ba, atol=1e-10)

    def test_matches_kron_embedding_oracle(self):
        from oracles import embed_kron

        rng = np.random.default_rng(11)
        psi = random_state(3, rng)
        for wires in ([1], [2, 0], [0, 1]):
            gate = haar_unitary(1 << len(wires), rng)
            expected = embed_kron(gate, wires, 3) @ psi
            np.testing.assert_allclose(apply_gate(psi, gate, wires), expected, atol=1e-12)

    def test_errors(self):
        psi = basis(2, 0)
        with pytest.raises(ValueError, match="does not match"):
            apply_gate(psi, np.eye(4, dtype=complex), [0])
        with pytest.raises(ValueError, match="out of range"):
            apply_gate(psi, X, [2])
        with pytest.raises(ValueError, match="distinct"):
            apply_gate(psi, np.eye(4, dtype=complex), [0, 0])
        with pytest.raises(ValueError, match="power of two"):
            n_qubits_of(np.zeros(3))


class TestPureTraceDistance:
    def test_identical_states(self):
        psi = random_state(2, np.random.default_rng(0))
        assert pure_trace_distance(psi, psi) == 0.0

    def test_orthogonal_states(self):
        assert pure_trace_distance(basis(1, 0), basis(1, 1)) == 2.0

    def test_zero_plus_pair(self):
        plus = np.array([1, 1], dtype=complex) / math.sqrt(2)
        # closed form: 2 sqrt(1 - 1/2) = sqrt(2)
        assert pure_trace_distance(basis(1, 0), plus) == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            pure_trace_distance(basis(1, 0), basis(2, 0))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_symmetry_and_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (random_state(2, rng) for _ in range(3))
        assert pure_trace_distance(a, b) == pytest.approx(pure_trace_distance(b, a), abs=1e-12)
        assert pure_trace_distance(a, c) <= pure_trace_distance(a, b) + pure_trace_distance(b, c) + 1e-9


class TestOperatorNorm:
    def test_identity(self):
        for dim in (2, 4, 8):
            assert operator_norm(np.eye(dim, dtype=complex)) == pytest.approx(1.0, abs=1e-10)

    def test_diagonal_spectrum(self):
        assert operator_norm(np.diag([3.0, -1.0]).astype(complex)) == pytest.approx(3.0, abs=1e-9)

    def test_pauli_zz(self):
        zz = np.kron(np.diag([1.0, -1.0]), np.diag([1.0, -1.0])).astype(complex)
        # oracle: enumerate the eigenvalues of the 4x4 directly
        assert max(abs(np.linalg.eigvalsh(zz))) == pytest.approx(1.0)
        assert operator_norm(zz) == pytest.approx(1.0, abs=1e-10)

    def test_against_svd_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
            expected = float(np.linalg.svd(m, compute_uv=False)[0])
            assert operator_norm(m) == pytest.approx(expected, rel=1e-8)

    def test_unitary_products_have_norm_one(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            u = haar_unitary(4, rng) @ haar_unitary(4, rng) @ haar_unitary(4, rng)
            assert operator_norm(u) == pytest.approx(1.0, abs=1e-9)

    def test_zero_matrix(self):
        assert operator_norm(np.zeros((3, 3), dtype=complex)) == 0.0

    def test_shape_error(self):
        with pytest.raises(ValueError, match="square"):
            operator_norm(np.zeros((2, 3)))


def test_unitarity_deviation_flags_non_unitary():
    assert unitarity_deviation(np.eye(2, dtype=complex)) == 0.0
    assert unitarity_deviation(2.0 * np.eye(2, dtype=complex)) == pytest.approx(3.0)
