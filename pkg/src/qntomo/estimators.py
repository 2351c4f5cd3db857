"""End-to-end estimators for star networks of single-Pauli channels.

* Z scheme: pairwise quadratic for the root channel, then a linear solve for
  each end channel.  The two mirror-image solutions ``theta`` and
  ``1 - theta`` explain the data equally well; ``regime`` picks one.
* GHZ schemes: direct decoding of the measured GHZ label into per-channel
  flip indicators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .distribution import GHZ_X, GHZ_Y, GHZ_Z, SCHEMES, Z_BASIS
from .errors import (
    EstimationError,
    EstimationFailedError,
    InconsistentStatisticsError,
    InvalidParameterError,
    SingularParameterError,
    UninformativePairError,
    UnsupportedModelError,
    WrongSchemeError,
)
from .measurement import Marginals, OutcomeRecord, marginals, marginals_from_weights
from .states import DiagonalState, bit_table

EPS_PAIR = 1e-6
EPS_DISCRIMINANT = 1e-6
EPS_SINGULAR = 1e-6

REGIMES = ("low", "high")


@dataclass
class EstimateReport:
    scheme: str
    candidates: list[np.ndarray]
    regime: str
    identifiable: bool
    shots: int | None = None
    std_errors: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def theta_hat(self) -> np.ndarray:
        return self.candidates[0]

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "theta_hat": [c.tolist() for c in self.candidates],
            "std_errors": None if self.std_errors is None else self.std_errors.tolist(),
            "regime": self.regime,
            "identifiable": self.identifiable,
            "N": self.shots,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=str)

    def csv_header(self) -> list[str]:
        n = self.theta_hat.size
        return (
            ["N", "seed"]
            + [f"theta{j}" for j in range(n)]
            + [f"se{j}" for j in range(n)]
            + ["regime", "identifiable"]
        )

    def csv_row(self, seed=None) -> list:
        se = self.std_errors if self.std_errors is not None else np.full(self.theta_hat.size, np.nan)
        return (
            [self.shots, seed]
            + [repr(float(v)) for v in self.theta_hat]
            + [repr(float(v)) for v in se]
            + [self.regime, self.identifiable]
        )


def _pair_coefficients(p_j: float, p_k: float, p_jk: float) -> tuple[float, float]:
    return 1 + 4 * p_jk - 2 * (p_j + p_k), p_j * p_k - p_jk


def _raw_roots(p_j, p_k, p_jk, eps_a=EPS_PAIR, eps_d=EPS_DISCRIMINANT) -> tuple[float, float, bool]:
    """Unclamped ``(high, low)`` roots of ``a (1 - t) t + c = 0`` and whether the discriminant was clamped."""
    a, c = _pair_coefficients(p_j, p_k, p_jk)
    if abs(a) < eps_a:
        raise UninformativePairError(f"|a| = {abs(a):.3g} below {eps_a}: pair carries no root-channel information")
    disc = 1 + 4 * c / a
    clamped = False
    if disc < 0:
        if disc < -eps_d:
            raise InconsistentStatisticsError(f"discriminant {disc:.3g} is negative beyond tolerance")
        disc, clamped = 0.0, True
    root = np.sqrt(disc)
    return (1 + root) / 2, (1 - root) / 2, clamped


def solve_theta0_pair(
    p_j: float, p_k: float, p_jk: float, eps_a: float = EPS_PAIR, eps_d: float = EPS_DISCRIMINANT
) -> tuple[float, float]:
    """Both candidate identity probabilities of the root channel from one end-node pair.

    Returns ``(high, low)`` clamped to ``[0, 1]``; they sum to one.
    """
    for v in (p_j, p_k, p_jk):
        if not 0 <= v <= 1:
            raise InvalidParameterError(f"probabilities must lie in [0, 1], got {v}")
    hi, lo, _ = _raw_roots(p_j, p_k, p_jk, eps_a, eps_d)
    return float(np.clip(hi, 0, 1)), float(np.clip(lo, 0, 1))


def _as_marginals(source) -> tuple[Marginals, OutcomeRecord | None]:
    if isinstance(source, Marginals):
        return source, None
    if isinstance(source, OutcomeRecord):
        if source.scheme not in (None, Z_BASIS):
            raise WrongSchemeError(f"record comes from {source.scheme}, not the Z scheme")
        return marginals(source), source
    if isinstance(source, DiagonalState):
        return marginals(source), None
    raise TypeError(f"cannot estimate from {type(source).__name__}")


def _z_candidate(m: Marginals, regime: str, eps_a, eps_d, eps_s, diag: dict | None = None) -> np.ndarray:
    """Regime-selected unclamped parameter vector."""
    selected = []
    skipped = []
    clamped_disc = 0
    for j, k in combinations(range(m.num_bits), 2):
        try:
            hi, lo, clamped = _raw_roots(m.p[j], m.p[k], m.pair[j, k], eps_a, eps_d)
        except (UninformativePairError, InconsistentStatisticsError) as exc:
            skipped.append({"pair": (j + 1, k + 1), "reason": type(exc).__name__})
            continue
        clamped_disc += clamped
        selected.append(hi if regime == "low" else lo)
    if diag is not None:
        diag["pairs_used"] = len(selected)
        diag["pairs_skipped"] = skipped
        diag["discriminant_clamps"] = clamped_disc
    if not selected:
        raise EstimationFailedError("no end-node pair carries information about the root channel")
    theta0 = float(np.mean(selected))
    denom = 1 - 2 * theta0
    if abs(denom) < eps_s:
        raise SingularParameterError(
            f"root channel estimate {theta0:.6f} is at 1/2; end channels are unidentifiable"
        )
    return np.concatenate([[theta0], (m.p - theta0) / denom])


def _clamp(v: np.ndarray) -> tuple[np.ndarray, list[int]]:
    out = np.clip(v, 0.0, 1.0)
    return out, [int(i) for i in np.flatnonzero(out != v)]


def estimate_z_scheme(
    source,
    regime: str = "low",
    *,
    eps_a: float = EPS_PAIR,
    eps_d: float = EPS_DISCRIMINANT,
    eps_s: float = EPS_SINGULAR,
) -> EstimateReport:
    """Estimate ``theta`` from Z-basis outcomes.

    ``source`` is an :class:`OutcomeRecord`, exact :class:`DiagonalState` or
    :class:`Marginals`.  The root parameter is the mean of the regime-selected
    roots over all informative pairs; ``theta_j = (p_j - theta_0) / (1 - 2 theta_0)``.
    Candidate 2 is the mirror image ``1 - candidate 1``.
    """
    if regime not in REGIMES:
        raise InvalidParameterError(f"regime must be 'low' or 'high', got {regime!r}")
    m, record = _as_marginals(source)
    if m.num_bits < 2:
        raise EstimationFailedError("the Z scheme needs at least two measuring end-nodes (n >= 3)")
    diag: dict = {}
    raw = _z_candidate(m, regime, eps_a, eps_d, eps_s, diag)
    first, clamps1 = _clamp(raw)
    second, clamps2 = _clamp(1 - raw)
    diag["clamped"] = {"candidate1": clamps1, "candidate2": clamps2}
    report = EstimateReport(
        Z_BASIS, [first, second], regime, False, shots=m.shots, diagnostics=diag
    )
    if record is not None:
        report.std_errors = std_errors(report, record)
    return report


def _ghz_flip_indicators(axis: str, num_qubits: int) -> np.ndarray:
    """``(2**n, n)`` table: row = label index, column ``e`` = 1 when that label means channel ``e`` flipped."""
    n = num_qubits
    bits = bit_table(n)  # column 0 is b, the rest are s
    b, s = bits[:, 0], bits[:, 1:]
    if axis in ("X", "Z"):
        return np.column_stack([b, s])
    if axis == "Y":
        if n % 2 == 0:
            raise UnsupportedModelError(
                "GHZ decoding of Y channels needs an odd number of end-nodes: with even n a root "
                "flip and flips on every end channel yield the same label"
            )
        f0 = b ^ (s.sum(axis=1) & 1)
        return np.column_stack([f0, s ^ f0[:, None]])
    raise InvalidParameterError(f"axis must be X, Y or Z, got {axis!r}")


def estimate_ghz_scheme(source, axis: str | None = None) -> EstimateReport:
    """Decode GHZ outcomes into flip counts; ``theta_e = 1 - freq(flip on e)``."""
    if isinstance(source, OutcomeRecord):
        weights, shots, scheme = source.counts.astype(float), source.shots, source.scheme
    elif isinstance(source, DiagonalState):
        weights, shots, scheme = np.asarray(source.probs, dtype=float), None, None
    else:
        raise TypeError(f"cannot estimate from {type(source).__name__}")
    if source.basis != "GHZ":
        raise WrongSchemeError("GHZ decoding needs GHZ-basis outcomes")
    if axis is None:
        if scheme is None:
            raise InvalidParameterError("channel axis unknown: pass axis or use a record with a scheme")
        axis = scheme[-1]
    axis = axis.upper()
    if scheme is not None and scheme != f"GHZ_{axis}":
        raise WrongSchemeError(f"record comes from {scheme}, estimator asked for GHZ_{axis}")
    flips = _ghz_flip_indicators(axis, source.num_qubits)
    freq = weights @ flips / weights.sum()
    theta = 1.0 - freq
    report = EstimateReport(f"GHZ_{axis}", [theta], "none", True, shots=shots, diagnostics={})
    if shots is not None:
        report.std_errors = std_errors(report, source)
    return report


def estimate(source, scheme: str | None = None, regime: str = "low") -> EstimateReport:
    scheme = (scheme or getattr(source, "scheme", None) or "").upper()
    if scheme == Z_BASIS:
        return estimate_z_scheme(source, regime)
    if scheme in (GHZ_X, GHZ_Y, GHZ_Z):
        return estimate_ghz_scheme(source, scheme[-1])
    raise InvalidParameterError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def _z_estimator_map(weights: np.ndarray, num_bits: int, regime: str) -> np.ndarray:
    m = marginals_from_weights(weights, num_bits)
    return _z_candidate(m, regime, EPS_PAIR, EPS_DISCRIMINANT, EPS_SINGULAR)


def std_errors(report: EstimateReport, record: OutcomeRecord) -> np.ndarray:
    """Per-parameter standard errors.

    GHZ: binomial ``sqrt(theta (1 - theta) / N)``.

    Z scheme: delta method on the multinomial cell frequencies ``pi``,
    ``se^2 = diag(J Sigma J^T)`` with ``Sigma = (diag(pi) - pi pi^T) / N`` and
    ``J`` the Jacobian of the estimator map ``pi -> theta`` (central
    differences, step 1e-7).  Mirror candidates share the same errors.
    """
    n_shots = record.shots
    theta = report.theta_hat
    if report.scheme != Z_BASIS:
        se = np.sqrt(theta * (1 - theta) / n_shots)
        degenerate = [int(i) for i in np.flatnonzero(se == 0)]
        if degenerate:
            report.diagnostics["degenerate_se"] = degenerate
        return se
    pi = record.counts / n_shots
    step = 1e-7
    m = record.num_qubits
    jac = np.empty((theta.size, pi.size))
    try:
        for i in range(pi.size):
            up, down = pi.copy(), pi.copy()
            up[i] += step
            down[i] -= step
            jac[:, i] = (
                _z_estimator_map(up, m, report.regime) - _z_estimator_map(down, m, report.regime)
            ) / (2 * step)
    except EstimationError:
        report.diagnostics["se_failed"] = True
        return np.full(theta.size, np.nan)
    cov = (np.diag(pi) - np.outer(pi, pi)) / n_shots
    return np.sqrt(np.clip(np.einsum("ai,ij,aj->a", jac, cov, jac), 0, None))
