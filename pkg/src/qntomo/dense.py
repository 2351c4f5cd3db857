"""Exact density-matrix simulation for small registers.

Qubit 0 is the leftmost (most significant) tensor factor.  The engine is a
reference oracle, capped at :data:`MAX_QUBITS`.
"""

from __future__ import annotations

from collections.abc import Sequence
from functools import lru_cache

import numpy as np

from .channels import PAULIS, ChannelModel, kraus_operators
from .errors import CapacityError, CircuitError, InvalidParameterError, NotDiagonalError
from .states import DiagonalState, GhzLabel, all_labels

MAX_QUBITS = 12
OFF_DIAGONAL_TOL = 1e-10

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def generalized_toffoli(num_qubits: int) -> np.ndarray:
    """``|0><0| (x) I + |1><1| (x) X^{(x) num_qubits-1}``: the first qubit controls a fan-out flip."""
    if num_qubits < 1:
        raise CircuitError("generalized Toffoli needs at least one qubit")
    dim = 2 ** (num_qubits - 1)
    rest = np.ones((1, 1), dtype=complex)
    for _ in range(num_qubits - 1):
        rest = np.kron(rest, PAULIS["X"])
    gate = np.zeros((2 * dim, 2 * dim), dtype=complex)
    gate[:dim, :dim] = np.eye(dim)
    gate[dim:, dim:] = rest
    return gate


class DensityMatrix:
    """``2**K x 2**K`` density matrix on ``K`` qubits."""

    def __init__(self, matrix, num_qubits: int | None = None, *, check: bool = True):
        matrix = np.asarray(matrix, dtype=complex)
        if num_qubits is None:
            num_qubits = int(round(np.log2(matrix.shape[0])))
        if num_qubits > MAX_QUBITS:
            raise CapacityError(f"dense engine is capped at {MAX_QUBITS} qubits, asked for {num_qubits}")
        if matrix.shape != (2**num_qubits, 2**num_qubits):
            raise InvalidParameterError(f"matrix shape {matrix.shape} does not fit {num_qubits} qubits")
        self.matrix = matrix
        self.num_qubits = num_qubits
        if check:
            self.validate()

    @classmethod
    def zero(cls, num_qubits: int) -> DensityMatrix:
        if num_qubits > MAX_QUBITS:
            raise CapacityError(f"dense engine is capped at {MAX_QUBITS} qubits, asked for {num_qubits}")
        m = np.zeros((2**num_qubits, 2**num_qubits), dtype=complex)
        m[0, 0] = 1.0
        return cls(m, num_qubits, check=False)

    @classmethod
    def from_vector(cls, psi) -> DensityMatrix:
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        return cls(np.outer(psi, psi.conj()))

    def validate(self, tol: float = 1e-10) -> None:
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=tol, rtol=0):
            raise InvalidParameterError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1) > tol:
            raise InvalidParameterError(f"trace is {np.trace(m).real}, expected 1")
        if np.linalg.eigvalsh(m).min() < -tol:
            raise InvalidParameterError("density matrix is not positive semidefinite")

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def copy(self) -> DensityMatrix:
        return DensityMatrix(self.matrix.copy(), self.num_qubits, check=False)

    def __repr__(self) -> str:
        return f"DensityMatrix(num_qubits={self.num_qubits})"


def _check_targets(num_qubits: int, targets: Sequence[int]) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise CircuitError(f"repeated target qubits {targets}")
    if any(not 0 <= t < num_qubits for t in targets):
        raise CircuitError(f"targets {targets} out of range for {num_qubits} qubits")
    return targets


def _apply_operator(matrix: np.ndarray, num_qubits: int, op: np.ndarray, targets) -> np.ndarray:
    """``op rho op^dagger`` with ``op`` acting on ``targets`` (in the order given)."""
    m = len(targets)
    k = num_qubits
    tensor = matrix.reshape((2,) * (2 * k))
    op_t = op.reshape((2,) * (2 * m))
    in_axes = list(range(m, 2 * m))
    # rows: contract op's input legs with the target row legs
    tensor = np.tensordot(op_t, tensor, axes=(in_axes, list(targets)))
    tensor = np.moveaxis(tensor, list(range(m)), list(targets))
    # columns: contract conj(op) input legs with the target column legs
    col_targets = [k + t for t in targets]
    tensor = np.tensordot(op_t.conj(), tensor, axes=(in_axes, col_targets))
    tensor = np.moveaxis(tensor, list(range(m)), col_targets)
    return tensor.reshape(2**k, 2**k)


def apply_gate(state: DensityMatrix, gate, targets: Sequence[int]) -> DensityMatrix:
    """``rho -> U rho U^dagger`` on ``targets``; ``targets[0]`` maps to the gate's most significant qubit."""
    gate = np.asarray(gate, dtype=complex)
    targets = _check_targets(state.num_qubits, targets)
    if gate.shape != (2 ** len(targets),) * 2:
        raise CircuitError(f"gate of shape {gate.shape} does not act on {len(targets)} qubits")
    if not np.allclose(gate.conj().T @ gate, np.eye(gate.shape[0]), atol=1e-12, rtol=0):
        raise CircuitError("gate is not unitary")
    return DensityMatrix(
        _apply_operator(state.matrix, state.num_qubits, gate, targets), state.num_qubits, check=False
    )


def apply_channel(state: DensityMatrix, channel: ChannelModel, target: int) -> DensityMatrix:
    """``rho -> sum_k theta_k U_k rho U_k^dagger`` on one qubit."""
    (target,) = _check_targets(state.num_qubits, [target])
    out = np.zeros_like(state.matrix)
    for kraus in kraus_operators(channel):
        out += _apply_operator(state.matrix, state.num_qubits, kraus, (target,))
    return DensityMatrix(out, state.num_qubits, check=False)


def partial_trace(state: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state on ``keep``, in the order given."""
    keep = _check_targets(state.num_qubits, keep)
    k = state.num_qubits
    drop = [q for q in range(k) if q not in keep]
    tensor = state.matrix.reshape((2,) * (2 * k))
    order = list(keep) + drop + [k + q for q in keep] + [k + q for q in drop]
    tensor = tensor.transpose(order)
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    reduced = np.einsum("ajbj->ab", tensor.reshape(dk, dd, dk, dd))
    return DensityMatrix(reduced, len(keep), check=False)


def permute_qubits(state: DensityMatrix, order: Sequence[int]) -> DensityMatrix:
    """New state whose qubit ``i`` is old qubit ``order[i]``."""
    order = _check_targets(state.num_qubits, order)
    if len(order) != state.num_qubits:
        raise CircuitError("permutation must mention every qubit")
    k = state.num_qubits
    tensor = state.matrix.reshape((2,) * (2 * k)).transpose(list(order) + [k + q for q in order])
    return DensityMatrix(tensor.reshape(2**k, 2**k), k, check=False)


# --- GHZ basis ---------------------------------------------------------------


def _label_from(label, num_qubits: int | None = None) -> GhzLabel:
    if isinstance(label, str):
        label = GhzLabel.parse(label)
    label = GhzLabel(str(label.s), int(label.b))
    if num_qubits is not None and label.num_qubits != num_qubits:
        raise InvalidParameterError(f"label {label} does not index {num_qubits} qubits")
    return label


def ghz_vector(label) -> np.ndarray:
    """``(|0 s> + (-1)^b |1 s_bar>) / sqrt(2)``."""
    label = _label_from(label)
    n = label.num_qubits
    s = int(label.s, 2) if label.s else 0
    s_bar = (2 ** (n - 1) - 1) ^ s
    psi = np.zeros(2**n, dtype=complex)
    psi[s] = 1 / np.sqrt(2)
    psi[2 ** (n - 1) + s_bar] = (-1) ** label.b / np.sqrt(2)
    return psi


def ghz_projector(label) -> np.ndarray:
    psi = ghz_vector(label)
    return np.outer(psi, psi.conj())


def ghz_state(label) -> DensityMatrix:
    return DensityMatrix(ghz_projector(label), check=False)


@lru_cache(maxsize=None)
def ghz_basis_matrix(num_qubits: int) -> np.ndarray:
    """Columns are GHZ vectors in label-index order."""
    basis = np.column_stack([ghz_vector(lab) for lab in all_labels("GHZ", num_qubits)])
    basis.setflags(write=False)
    return basis


def _flip(s: str, j: int) -> str:
    return s[:j] + ("1" if s[j] == "0" else "0") + s[j + 1 :]


def _complement(s: str) -> str:
    return "".join("1" if c == "0" else "0" for c in s)


def ghz_pauli_action(label, axis: str, j: int) -> tuple[GhzLabel, complex]:
    """Pauli ``axis`` on qubit ``j`` of ``|Phi_s^b>``, returned as ``(new_label, phase)``.

    The label update is exact label algebra; the phase is the exact global
    factor (``+-1`` for X and Z, ``+-i`` for Y).
    """
    label = _label_from(label)
    n = label.num_qubits
    if not 0 <= j < n:
        raise InvalidParameterError(f"qubit {j} out of range for {n}-qubit GHZ state")
    axis = str(axis).upper()
    s, b = label.s, label.b
    if axis == "X":
        if j == 0:
            return GhzLabel(_complement(s), b), complex((-1) ** b)
        return GhzLabel(_flip(s, j - 1), b), 1 + 0j
    if axis == "Z":
        phase = 1 if j == 0 else (-1) ** int(s[j - 1])
        return GhzLabel(s, b ^ 1), complex(phase)
    if axis == "Y":
        # Y = i X Z
        mid, z_phase = ghz_pauli_action(label, "Z", j)
        out, x_phase = ghz_pauli_action(mid, "X", j)
        return out, 1j * z_phase * x_phase
    raise InvalidParameterError(f"axis must be X, Y or Z, got {axis!r}")


# --- diagonal extraction -------------------------------------------------------


def _diagonal(matrix: np.ndarray, basis: str, tol: float) -> np.ndarray:
    off = matrix - np.diag(np.diag(matrix))
    leak = np.abs(off).max() if off.size else 0.0
    if leak > tol:
        raise NotDiagonalError(f"state has off-diagonal mass {leak:.3e} in the {basis} basis")
    return np.diag(matrix).real.copy()


def basis_probabilities(state: DensityMatrix, basis: str) -> np.ndarray:
    """Born probabilities ``Tr[Pi_l rho]`` for every label of ``basis`` (no diagonality check)."""
    if basis == "Z":
        p = np.diag(state.matrix).real.copy()
    elif basis == "GHZ":
        b = ghz_basis_matrix(state.num_qubits)
        p = np.einsum("il,ij,jl->l", b.conj(), state.matrix, b).real
    else:
        raise InvalidParameterError(f"unknown basis {basis!r}")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def diagonalize_in_basis(state: DensityMatrix, basis: str, tol: float = OFF_DIAGONAL_TOL) -> DiagonalState:
    if basis == "Z":
        probs = _diagonal(state.matrix, "Z", tol)
    elif basis == "GHZ":
        b = ghz_basis_matrix(state.num_qubits)
        probs = _diagonal(b.conj().T @ state.matrix @ b, "GHZ", tol)
    else:
        raise InvalidParameterError(f"unknown basis {basis!r}")
    probs = np.clip(probs, 0.0, None)
    return DiagonalState(basis, state.num_qubits, probs / probs.sum())
