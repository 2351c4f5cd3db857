from __future__ import annotations

import itertools
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qntomo import dense
from qntomo.channels import PAULIS, make_depolarizing, make_single_pauli
from qntomo.errors import CapacityError, CircuitError, InvalidParameterError, NotDiagonalError
from qntomo.states import GhzLabel, all_labels

I2 = np.eye(2)


def embed(op, targets, num_qubits):
    """Oracle: full-space operator by permuting a Kronecker product (qubit 0 most significant)."""
    rest = [q for q in range(num_qubits) if q not in targets]
    full = np.kron(op, np.eye(2 ** len(rest)))
    # full acts on qubits listed in `order`; move axes back to natural order
    inv = np.argsort(list(targets) + rest)
    t = full.reshape([2] * (2 * num_qubits)).transpose(list(inv) + [num_qubits + i for i in inv])
    return t.reshape(2**num_qubits, 2**num_qubits)


def random_rho(n, rng):
    a = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = a @ a.conj().T
    return dense.DensityMatrix(rho / np.trace(rho))


def random_unitary(k, rng):
    q, r = np.linalg.qr(rng.normal(size=(2**k, 2**k)) + 1j * rng.normal(size=(2**k, 2**k)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_x_on_zero():
    out = dense.apply_gate(dense.DensityMatrix.zero(1), PAULIS["X"], [0])
    np.testing.assert_allclose(out.matrix, np.diag([0, 1]))


def test_bell_preparation():
    rho = dense.apply_gate(dense.DensityMatrix.zero(2), dense.H, [0])
    rho = dense.apply_gate(rho, dense.CNOT, [0, 1])
    np.testing.assert_allclose(rho.matrix, dense.ghz_projector(GhzLabel("0", 0)), atol=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_generalized_toffoli(k):
    t = dense.generalized_toffoli(k)
    psi = np.zeros(2**k)
    psi[2 ** (k - 1)] = 1  # |1 0..0>
    np.testing.assert_allclose(t @ psi, np.eye(2**k)[-1])
    psi0 = np.eye(2**k)[1 if k > 1 else 0]
    np.testing.assert_allclose(t @ psi0, psi0)


def test_toffoli_two_is_cnot():
    np.testing.assert_allclose(dense.generalized_toffoli(2), dense.CNOT)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=4), st.data())
def test_apply_gate_matches_kron_oracle(n, data):
    k = data.draw(st.integers(min_value=1, max_value=n))
    targets = data.draw(st.permutations(range(n)))[:k]
    rng = np.random.default_rng(data.draw(st.integers(min_value=0, max_value=2**31)))
    rho = random_rho(n, rng)
    u = random_unitary(k, rng)
    full = embed(u, targets, n)
    out = dense.apply_gate(rho, u, targets)
    np.testing.assert_allclose(out.matrix, full @ rho.matrix @ full.conj().T, atol=1e-12)


def test_apply_gate_rejects_non_unitary():
    with pytest.raises(CircuitError):
        dense.apply_gate(dense.DensityMatrix.zero(1), np.diag([1, 2]), [0])


def test_apply_gate_bad_targets():
    with pytest.raises(CircuitError):
        dense.apply_gate(dense.DensityMatrix.zero(2), dense.CNOT, [0, 0])
    with pytest.raises(CircuitError):
        dense.apply_gate(dense.DensityMatrix.zero(2), PAULIS["X"], [2])


def test_channel_on_zero():
    out = dense.apply_channel(dense.DensityMatrix.zero(1), make_single_pauli("X", 0.8), 0)
    np.testing.assert_allclose(out.matrix, np.diag([0.8, 0.2]))


def test_channel_on_bell_partner():
    t0 = 0.8
    out = dense.apply_channel(dense.ghz_state(GhzLabel("0", 0)), make_single_pauli("X", t0), 1)
    expected = t0 * dense.ghz_projector(GhzLabel("0", 0)) + (1 - t0) * dense.ghz_projector(GhzLabel("1", 0))
    np.testing.assert_allclose(out.matrix, expected, atol=1e-15)


def test_depolarizing_channel_matches_oracle():
    rng = np.random.default_rng(7)
    rho = random_rho(3, rng)
    w = [0.7, 0.1, 0.15, 0.05]
    expected = sum(
        p * embed(PAULIS[a], [1], 3) @ rho.matrix @ embed(PAULIS[a], [1], 3).conj().T
        for p, a in zip(w, "IXYZ")
    )
    out = dense.apply_channel(rho, make_depolarizing(w), 1)
    np.testing.assert_allclose(out.matrix, expected, atol=1e-14)


def test_partial_trace_oracle():
    rng = np.random.default_rng(8)
    rho = random_rho(3, rng)
    t = rho.matrix.reshape([2] * 6)
    expected = np.einsum("abcdbf->acdf", t).reshape(4, 4)
    np.testing.assert_allclose(dense.partial_trace(rho, [0, 2]).matrix, expected, atol=1e-14)


def test_permute_qubits():
    rng = np.random.default_rng(9)
    a, b = random_rho(1, rng), random_rho(2, rng)
    joint = dense.DensityMatrix(np.kron(a.matrix, b.matrix))
    swapped = dense.permute_qubits(joint, [1, 2, 0])
    np.testing.assert_allclose(swapped.matrix, np.kron(b.matrix, a.matrix), atol=1e-14)


def test_single_qubit_ghz_is_plus():
    np.testing.assert_allclose(dense.ghz_projector(GhzLabel("", 0)), np.full((2, 2), 0.5))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_ghz_basis_is_orthonormal(n):
    b = dense.ghz_basis_matrix(n)
    np.testing.assert_allclose(b.conj().T @ b, np.eye(2**n), atol=1e-15)


def test_pauli_action_examples():
    assert dense.ghz_pauli_action(GhzLabel("0", 0), "X", 1) == (GhzLabel("1", 0), 1)
    for j in range(3):
        new, phase = dense.ghz_pauli_action(GhzLabel("01", 0), "Z", j)
        assert new == GhzLabel("01", 1) and abs(phase) == 1
    new, phase = dense.ghz_pauli_action(GhzLabel("01", 1), "X", 0)
    assert new == GhzLabel("10", 1) and phase == -1
    _, phase = dense.ghz_pauli_action(GhzLabel("01", 0), "Y", 2)
    assert phase in (1j, -1j)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_pauli_action_table_against_matrices(n):
    for label, axis in itertools.product(all_labels("GHZ", n), "XYZ"):
        psi = dense.ghz_vector(label)
        for j in range(n):
            op = reduce(np.kron, [PAULIS[axis] if q == j else I2 for q in range(n)])
            new, phase = dense.ghz_pauli_action(label, axis, j)
            np.testing.assert_allclose(op @ psi, phase * dense.ghz_vector(new), atol=1e-12)


def test_diagonalize_pure_zero():
    d = dense.diagonalize_in_basis(dense.DensityMatrix.zero(3), "Z")
    assert d.as_dict() == {"000": 1.0}


def test_diagonalize_rejects_coherence():
    with pytest.raises(NotDiagonalError):
        dense.diagonalize_in_basis(dense.ghz_state(GhzLabel("0", 0)), "Z")
    with pytest.raises(NotDiagonalError):
        dense.diagonalize_in_basis(dense.DensityMatrix.zero(2), "GHZ")


def test_capacity_cap():
    with pytest.raises(CapacityError):
        dense.DensityMatrix.zero(dense.MAX_QUBITS + 1)


def test_density_matrix_validation():
    with pytest.raises(InvalidParameterError):
        dense.DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(InvalidParameterError):
        dense.DensityMatrix(np.diag([1.5, -0.5]))
