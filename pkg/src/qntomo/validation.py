"""Invariant suites shared by the ``validate`` command and the test-suite."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import dense
from .channels import PAULIS
from .distribution import (
    GHZ_X,
    GHZ_Y,
    GHZ_Z,
    SCHEME_AXIS,
    SCHEMES,
    Z_BASIS,
    CircuitSpec,
    Gate,
    NodeCircuit,
    distribute,
    flip_distribution,
    preset,
    single_pauli_channels,
)
from .errors import NotDiagonalError, QntomoError
from .fisher import EigenvalueModel, qfim, qfim_finite_difference, sld_eigenvalues
from .states import all_labels
from .topology import StarTopology

GRID = (0.1, 0.5, 0.9)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def _grid(n: int, values=GRID):
    return (np.array(t) for t in itertools.product(values, repeat=n))


def pauli_action_table(max_qubits: int = 4, tol: float = 1e-12) -> CheckResult:
    """Label algebra of single Paulis on GHZ states against dense matrix products."""
    worst = 0.0
    checked = 0
    for n in range(2, max_qubits + 1):
        for label in all_labels("GHZ", n):
            psi = dense.ghz_vector(label)
            for axis in ("X", "Y", "Z"):
                for j in range(n):
                    op = np.array([[1.0 + 0j]])
                    for q in range(n):
                        op = np.kron(op, PAULIS[axis] if q == j else PAULIS["I"])
                    new, phase = dense.ghz_pauli_action(label, axis, j)
                    worst = max(worst, float(np.abs(op @ psi - phase * dense.ghz_vector(new)).max()))
                    checked += 1
    return CheckResult("ghz pauli action table", worst <= tol, f"{checked} cases, max error {worst:.1e}")


def engine_equivalence(ns=(2, 3, 4), schemes=(Z_BASIS, GHZ_X), tol: float = 1e-10) -> CheckResult:
    """Dense final-state diagonals equal the flip-engine distributions over the grid."""
    worst = 0.0
    checked = 0
    for n in ns:
        star = StarTopology(n)
        for scheme in schemes:
            circuit, eta = preset(scheme, star)
            for theta in _grid(n):
                channels = single_pauli_channels(SCHEME_AXIS[scheme], theta)
                rho = distribute(star, circuit, eta, channels, engine="dense")
                exact = dense.diagonalize_in_basis(rho, circuit.basis, tol)
                flip = flip_distribution(scheme, theta)
                worst = max(worst, float(np.abs(exact.probs - flip.probs).max()))
                checked += 1
    return CheckResult(
        f"engine equivalence {','.join(schemes)} n={','.join(map(str, ns))}",
        worst <= tol,
        f"{checked} cases, max error {worst:.1e}",
    )


def ghz_diagonality(circuit: CircuitSpec, eta, n: int, axis: str, tol: float = dense.OFF_DIAGONAL_TOL) -> CheckResult:
    """A circuit's output must be diagonal in the GHZ basis at every grid point."""
    star = StarTopology(n)
    for theta in _grid(n):
        rho = distribute(star, circuit, eta, single_pauli_channels(axis, theta), engine="dense")
        try:
            dense.diagonalize_in_basis(rho, "GHZ", tol)
        except NotDiagonalError as exc:
            return CheckResult("ghz diagonality", False, f"theta={theta.tolist()}: {exc}")
    return CheckResult("ghz diagonality", True, f"n={n}, axis {axis}")


def drop_gate(circuit: CircuitSpec, node: int, gate_name: str) -> CircuitSpec:
    """Copy of ``circuit`` with every ``gate_name`` removed from ``node`` (negative controls)."""
    nc = circuit.node(node)
    gates = tuple(g for g in nc.gates if Gate(*g).name != gate_name)
    return circuit.replace_node(node, NodeCircuit(nc.num_qubits, gates))


def normalization(ns=(2, 3, 4), tol: float = 1e-12) -> CheckResult:
    worst = 0.0
    for n in ns:
        for scheme in SCHEMES:
            for theta in _grid(n, (0.0, 0.3, 1.0)):
                worst = max(worst, abs(flip_distribution(scheme, theta).probs.sum() - 1))
                worst = max(worst, abs(EigenvalueModel(scheme, n).eigenvalues(theta).sum() - 1))
    return CheckResult("distribution normalization", worst <= tol, f"max deviation {worst:.1e}")


def fisher_gradients(n: int = 3, rtol: float = 1e-6) -> CheckResult:
    """Analytic-gradient QFIM against finite differences on the interior grid.

    Errors are relative to ``max(|F|, 1)`` so a vanishing F is compared absolutely.
    """
    worst = 0.0
    for scheme in (Z_BASIS, GHZ_X):
        model = EigenvalueModel(scheme, n)
        for theta in _grid(n, (0.2, 0.6, 0.9)):
            a = qfim(model, theta).F
            b = qfim_finite_difference(model, theta).F
            worst = max(worst, float(np.abs(a - b).max() / max(np.abs(a).max(), 1.0)))
    return CheckResult("qfim analytic vs finite differences", worst <= rtol, f"max relative error {worst:.1e}")


def ghz_fisher_diagonal(n: int = 3, tol: float = 1e-10) -> CheckResult:
    worst = 0.0
    for scheme in (GHZ_X, GHZ_Z) + ((GHZ_Y,) if n % 2 else ()):
        model = EigenvalueModel(scheme, n)
        for theta in _grid(n, (0.2, 0.6, 0.9)):
            F = qfim(model, theta).F
            worst = max(worst, float(np.abs(F - np.diag(1 / (theta * (1 - theta)))).max()))
    return CheckResult("ghz qfim diagonal", worst <= tol, f"max error {worst:.1e}")


def sld_equation(n: int = 3, tol: float = 1e-8) -> CheckResult:
    """``(L rho + rho L) / 2`` equals the finite-difference derivative of the dense state."""
    worst = 0.0
    step = 1e-6
    for scheme in (Z_BASIS, GHZ_X):
        model = EigenvalueModel(scheme, n)
        proj = model.projectors()
        theta = np.resize([0.7, 0.35, 0.55, 0.8], n)
        rho = model.density_matrix(theta)
        for j in range(n):
            L = np.einsum("k,kij->ij", sld_eigenvalues(model, theta, j), proj)
            e = np.zeros(n)
            e[j] = step
            drho = (model.density_matrix(theta + e) - model.density_matrix(theta - e)) / (2 * step)
            worst = max(worst, float(np.abs((L @ rho + rho @ L) / 2 - drho).max()))
    return CheckResult("sld equation", worst <= tol, f"max error {worst:.1e}")


def edge_usage(ns=(2, 3, 4)) -> CheckResult:
    """Every channel acts exactly once per distribution run."""
    for n in ns:
        star = StarTopology(n)
        for scheme in SCHEMES:
            circuit, eta = preset(scheme, star)
            channels = single_pauli_channels(SCHEME_AXIS[scheme], np.full(n, 0.7))
            for engine in ("dense", "flip"):
                log: list = []
                distribute(star, circuit, eta, channels, engine=engine, log=log)
                uses = Counter(e for _, e, _ in log)
                if sorted(uses) != list(range(n)) or set(uses.values()) != {1}:
                    return CheckResult("edge usage", False, f"{scheme} n={n} {engine}: {dict(uses)}")
    return CheckResult("edge usage", True, "each channel used once")


def default_suite(n: int = 3) -> list[CheckResult]:
    """Everything ``qntomo validate`` runs."""
    checks = [
        lambda: pauli_action_table(4),
        lambda: engine_equivalence((2, 3, 4), (Z_BASIS, GHZ_X)),
        lambda: engine_equivalence((n,), (GHZ_Y, GHZ_Z)),
        lambda: ghz_diagonality(*preset(GHZ_X, StarTopology(n)), n, "X"),
        normalization,
        lambda: fisher_gradients(n),
        lambda: ghz_fisher_diagonal(n),
        lambda: sld_equation(n),
        edge_usage,
    ]
    results = []
    for check in checks:
        try:
            results.append(check())
        except QntomoError as exc:
            results.append(CheckResult(getattr(check, "__name__", "check"), False, f"{type(exc).__name__}: {exc}"))
    return results
