"""Quantum Fisher information for states diagonal in a parameter-independent basis.

For ``rho(theta) = sum_k lambda_k(theta) Lambda_k`` with fixed projectors the
symmetric logarithmic derivatives are diagonal in the same basis with
eigenvalues ``d lambda_k / d theta_j / lambda_k``, and

    F_ab = sum_k (1 / lambda_k) (d lambda_k / d theta_a) (d lambda_k / d theta_b).

Each eigenvalue of the star schemes is a sum of products of per-channel
factors ``theta_e`` (no flip) or ``1 - theta_e`` (flip).  A model stores, for
every label, the flip patterns that produce it, which gives ``lambda`` and
its exact gradient by the product rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dense
from .distribution import GHZ_X, GHZ_Y, GHZ_Z, SCHEMES, Z_BASIS
from .errors import InvalidParameterError, UnsupportedSupportError
from .states import Label, all_labels, bit_table

DIRECT = "DIRECT"
SINGULAR_RTOL = 1e-10
ZERO_TOL = 1e-14


class EigenvalueModel:
    """Eigenvalues ``lambda(label, theta)`` of a scheme's distributed state."""

    def __init__(self, scheme: str, n: int):
        scheme = scheme.upper()
        if scheme not in SCHEMES + (DIRECT,):
            raise InvalidParameterError(f"unknown scheme {scheme!r}")
        if scheme == DIRECT and n != 1:
            raise InvalidParameterError("the direct (single channel) model has exactly one parameter")
        if scheme != DIRECT and n < 2:
            raise InvalidParameterError("star schemes need n >= 2")
        self.scheme = scheme
        self.n = n
        if scheme in (Z_BASIS, DIRECT):
            self.basis = "Z"
            self.num_qubits = n - 1 if scheme == Z_BASIS else 1
        else:
            self.basis = "GHZ"
            self.num_qubits = n
        self.term_label, self.term_flips = self._terms()

    def __repr__(self) -> str:
        return f"EigenvalueModel({self.scheme!r}, n={self.n})"

    @property
    def labels(self) -> list[Label]:
        return all_labels(self.basis, self.num_qubits)

    @property
    def num_labels(self) -> int:
        return 2**self.num_qubits

    def _terms(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        labels, flips = [], []
        if self.scheme == DIRECT:
            return np.array([0, 1]), np.array([[0], [1]])
        if self.scheme == Z_BASIS:
            # S_j = F_0 xor F_j: each string has one preimage per root outcome
            for idx, s in enumerate(bit_table(n - 1)):
                for f0 in (0, 1):
                    labels.append(idx)
                    flips.append(np.concatenate([[f0], s ^ f0]))
            return np.array(labels), np.array(flips)
        table = bit_table(n)
        for idx, row in enumerate(table):
            b, s = row[0], row[1:]
            if self.scheme in (GHZ_X, GHZ_Z):
                labels.append(idx)
                flips.append(row.copy())
                continue
            # GHZ_Y: s = F_0 (1..1) xor F_end, b = F_0 xor parity(F_end)
            for f0 in (0, 1):
                if b == (int(s.sum()) + n * f0) % 2:
                    labels.append(idx)
                    flips.append(np.concatenate([[f0], s ^ f0]))
        return np.array(labels), np.array(flips)

    def _factors(self, theta: np.ndarray) -> np.ndarray:
        return np.where(self.term_flips == 1, 1.0 - theta, theta)

    def check_theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.n:
            raise InvalidParameterError(f"expected {self.n} parameters, got {theta.size}")
        if np.any(theta < 0) or np.any(theta > 1):
            raise InvalidParameterError(f"parameters must lie in [0, 1], got {theta}")
        return theta

    def eigenvalues(self, theta) -> np.ndarray:
        return self.polynomial(self.check_theta(theta))

    def polynomial(self, theta: np.ndarray) -> np.ndarray:
        """Eigenvalues as polynomials, evaluated without range checks."""
        return np.bincount(self.term_label, self._factors(theta).prod(axis=1), minlength=self.num_labels)

    def gradients(self, theta) -> np.ndarray:
        """``(labels, n)`` matrix of ``d lambda_k / d theta_a``."""
        theta = self.check_theta(theta)
        factors = self._factors(theta)
        sign = np.where(self.term_flips == 1, -1.0, 1.0)
        grad = np.empty((self.num_labels, self.n))
        for a in range(self.n):
            others = np.delete(factors, a, axis=1).prod(axis=1)
            grad[:, a] = np.bincount(self.term_label, others * sign[:, a], minlength=self.num_labels)
        return grad

    def projectors(self) -> np.ndarray:
        """``(labels, d, d)`` stack of the fixed eigenprojectors."""
        d = 2**self.num_qubits
        if self.basis == "Z":
            return np.array([np.diag(np.eye(d)[k]).astype(complex) for k in range(d)])
        b = dense.ghz_basis_matrix(self.num_qubits)
        return np.einsum("ik,jk->kij", b, b.conj())

    def density_matrix(self, theta) -> np.ndarray:
        return np.einsum("k,kij->ij", self.eigenvalues(theta), self.projectors())


def eigenvalue_gradients(model: EigenvalueModel, theta) -> np.ndarray:
    return model.gradients(theta)


def finite_difference_gradients(model: EigenvalueModel, theta, step: float = 1e-6) -> np.ndarray:
    """Central differences of the eigenvalues; ``theta +- step`` may leave [0, 1] slightly."""
    theta = model.check_theta(theta)
    grad = np.empty((model.num_labels, model.n))
    for a in range(model.n):
        e = np.zeros(model.n)
        e[a] = step
        grad[:, a] = (model.polynomial(theta + e) - model.polynomial(theta - e)) / (2 * step)
    return grad


def _support(lam: np.ndarray, grad: np.ndarray) -> np.ndarray:
    zero = lam <= ZERO_TOL
    bad = zero & (np.abs(grad).max(axis=1) > ZERO_TOL)
    if np.any(bad):
        raise UnsupportedSupportError(
            f"labels {np.flatnonzero(bad).tolist()} have zero probability but nonzero gradient "
            "(boundary point: Fisher information diverges)"
        )
    return ~zero


def sld_eigenvalues(model: EigenvalueModel, theta, j: int) -> np.ndarray:
    """Eigenvalues of the SLD for parameter ``j`` (zero on labels outside the support)."""
    lam = model.eigenvalues(theta)
    grad = model.gradients(theta)
    keep = _support(lam, grad)
    out = np.zeros(model.num_labels)
    out[keep] = grad[keep, j] / lam[keep]
    return out


def sld_operator(model: EigenvalueModel, theta, j: int) -> np.ndarray:
    return np.einsum("k,kij->ij", sld_eigenvalues(model, theta, j), model.projectors())


@dataclass
class QfimResult:
    F: np.ndarray
    F_inverse: np.ndarray | None
    eigenvalues: np.ndarray
    null_space: np.ndarray | None = None
    skipped_labels: list[int] = field(default_factory=list)

    @property
    def singular(self) -> bool:
        return self.F_inverse is None

    @property
    def condition_number(self) -> float:
        w = np.abs(self.eigenvalues)
        return float(w.max() / w.min()) if w.min() > 0 else float("inf")

    def qcrb(self, shots: int) -> np.ndarray | None:
        """Per-parameter variance bound ``[F^-1]_jj / N``."""
        return None if self.F_inverse is None else np.diag(self.F_inverse) / shots


def fisher_from_gradients(lam: np.ndarray, grad: np.ndarray) -> tuple[np.ndarray, list[int]]:
    keep = _support(lam, grad)
    g = grad[keep]
    F = (g / lam[keep, None]).T @ g
    return (F + F.T) / 2, [int(i) for i in np.flatnonzero(~keep)]


def _result(F: np.ndarray, skipped: list[int]) -> QfimResult:
    w, v = np.linalg.eigh(F)
    scale = np.abs(w).max() if w.size else 0.0
    threshold = SINGULAR_RTOL * scale
    if scale == 0 or w.min() <= threshold:
        return QfimResult(F, None, w, v[:, w <= threshold], skipped)
    return QfimResult(F, (v / w) @ v.T, w, None, skipped)


def qfim(model: EigenvalueModel, theta) -> QfimResult:
    lam = model.eigenvalues(theta)
    F, skipped = fisher_from_gradients(lam, model.gradients(theta))
    return _result(F, skipped)


def qfim_finite_difference(model: EigenvalueModel, theta, step: float = 1e-6) -> QfimResult:
    lam = model.eigenvalues(theta)
    F, skipped = fisher_from_gradients(lam, finite_difference_gradients(model, theta, step))
    return _result(F, skipped)


def qcrb_check(report_or_variances, result: QfimResult, shots: int, mc_tolerance: float = 0.05) -> list[dict]:
    """Compare estimator variances with the bound ``[F^-1]_jj / N``.

    Accepts an :class:`~qntomo.estimators.EstimateReport` (uses its squared
    standard errors) or an array of empirical variances.  A ratio below
    ``1 - 3 * mc_tolerance`` is flagged as a violation.
    """
    std = getattr(report_or_variances, "std_errors", None)
    variances = np.asarray(std**2 if std is not None else report_or_variances, dtype=float)
    bound = result.qcrb(shots)
    rows = []
    for j, var in enumerate(variances):
        b = None if bound is None else float(bound[j])
        ratio = None if not b else float(var / b)
        rows.append(
            {
                "param": j,
                "variance": float(var),
                "bound": b,
                "ratio": ratio,
                "violation": ratio is not None and ratio < 1 - 3 * mc_tolerance,
            }
        )
    return rows
