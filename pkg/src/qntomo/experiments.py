"""Experiment orchestration: seeded trials, convergence sweeps and table output.

Trial seeds come from a counter scheme: the sampling seed of trial ``t`` at
schedule position ``i`` is the first 63 bits of
``SeedSequence([master_seed, i, t])``.  Results therefore do not depend on
execution order or worker count.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import dense
from .config import ExperimentConfig
from .distribution import SCHEME_BASIS, distribute
from .errors import EstimationError, QntomoError, UnsupportedModelError
from .estimators import EstimateReport, estimate
from .measurement import OutcomeRecord, sample
from .states import DiagonalState

CONVERGENCE_FORMAT = "qntomo-convergence v1"
CONVERGENCE_COLUMNS = (
    "N", "trial", "seed", "candidate", "param", "theta_hat", "std_error", "regime", "identifiable", "error",
)


def derive_seed(master_seed: int, schedule_index: int, trial: int) -> int:
    state = np.random.SeedSequence([master_seed, schedule_index, trial]).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))


def outcome_distribution(cfg: ExperimentConfig) -> DiagonalState:
    """Exact outcome probabilities of the configured scheme in its measurement basis."""
    circuit, eta = cfg.circuit()
    basis = circuit.basis
    if cfg.engine == "flip":
        return distribute(cfg.topology, circuit, eta, cfg.channels, engine="flip")
    state = distribute(cfg.topology, circuit, eta, cfg.channels, engine="dense")
    return DiagonalState(basis, state.num_qubits, dense.basis_probabilities(state, basis))


def simulate_record(cfg: ExperimentConfig, shots: int, seed: int, dist: DiagonalState | None = None) -> OutcomeRecord:
    dist = dist if dist is not None else outcome_distribution(cfg)
    return sample(dist, shots, seed, scheme=cfg.scheme, workers=cfg.workers)


@dataclass
class TrialResult:
    shots: int
    trial: int
    seed: int
    report: EstimateReport | None
    error: str | None = None


def run_trial(cfg: ExperimentConfig, dist: DiagonalState, schedule_index: int, trial: int) -> TrialResult:
    shots = cfg.shots[schedule_index]
    seed = derive_seed(cfg.seed, schedule_index, trial)
    record = sample(dist, shots, seed, scheme=cfg.scheme)
    try:
        report = estimate(record, cfg.scheme, cfg.regime)
    except EstimationError as exc:
        return TrialResult(shots, trial, seed, None, f"{type(exc).__name__}: {exc}")
    return TrialResult(shots, trial, seed, report)


def run_convergence(cfg: ExperimentConfig) -> list[TrialResult]:
    """Every (N, trial) pair of the schedule, in deterministic order."""
    if SCHEME_BASIS.get(cfg.scheme) is None:
        raise UnsupportedModelError(f"scheme {cfg.scheme} has no estimator")
    dist = outcome_distribution(cfg)
    jobs = [(i, t) for i in range(len(cfg.shots)) for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            return list(pool.map(lambda job: run_trial(cfg, dist, *job), jobs))
    return [run_trial(cfg, dist, i, t) for i, t in jobs]


def convergence_rows(results: list[TrialResult]) -> list[dict]:
    rows = []
    for res in results:
        base = {"N": res.shots, "trial": res.trial, "seed": res.seed}
        if res.report is None:
            rows.append({**base, "candidate": "", "param": "", "theta_hat": "", "std_error": "",
                         "regime": "", "identifiable": "", "error": res.error})
            continue
        rep = res.report
        se = rep.std_errors if rep.std_errors is not None else np.full(rep.theta_hat.size, np.nan)
        for c, cand in enumerate(rep.candidates, start=1):
            for j, value in enumerate(cand):
                rows.append({**base, "candidate": c, "param": j, "theta_hat": repr(float(value)),
                             "std_error": repr(float(se[j])), "regime": rep.regime,
                             "identifiable": rep.identifiable, "error": ""})
    return rows


def convergence_csv(results: list[TrialResult]) -> str:
    buf = io.StringIO()
    buf.write(f"# {CONVERGENCE_FORMAT}\n")
    writer = csv.DictWriter(buf, CONVERGENCE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(convergence_rows(results))
    return buf.getvalue()


def read_convergence_csv(text: str) -> list[dict]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != f"# {CONVERGENCE_FORMAT}":
        raise QntomoError(f"not a {CONVERGENCE_FORMAT} file")
    return list(csv.DictReader(lines[1:]))


def matrix_csv(matrix: np.ndarray, header: str) -> str:
    buf = io.StringIO()
    buf.write(f"# {header}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"theta{j}" for j in range(matrix.shape[1])])
    for row in matrix:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()
