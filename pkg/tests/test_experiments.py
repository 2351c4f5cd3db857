from __future__ import annotations

import numpy as np
import pytest

from qntomo.config import config_from_dict
from qntomo.distribution import Z_BASIS
from qntomo.experiments import (
    convergence_csv,
    derive_seed,
    outcome_distribution,
    read_convergence_csv,
    run_convergence,
)
from qntomo.errors import QntomoError


def cfg(scheme="GHZ_X", theta=(0.8, 0.3, 0.4), engine="flip", workers=1):
    return config_from_dict(
        {
            "topology": {"n": len(theta)},
            "channels": {"theta": list(theta)},
            "scheme": {"name": scheme, "engine": engine},
            "experiment": {"shots": [1000, 5000], "trials": 3, "seed": 5, "workers": workers},
        }
    )


def test_seed_derivation():
    seeds = {derive_seed(1, i, t) for i in range(4) for t in range(50)}
    assert len(seeds) == 200
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(2, 2, 3)
    assert all(0 <= s < 2**63 for s in seeds)


def test_engines_give_same_distribution():
    np.testing.assert_allclose(outcome_distribution(cfg()).probs, outcome_distribution(cfg(engine="dense")).probs, atol=1e-12)


def test_convergence_order_and_schema():
    results = run_convergence(cfg(Z_BASIS))
    assert [(r.shots, r.trial) for r in results] == [(n, t) for n in (1000, 5000) for t in range(3)]
    rows = read_convergence_csv(convergence_csv(results))
    assert len(rows) == 6 * 2 * 3
    assert {r["candidate"] for r in rows} == {"1", "2"}
    ghz_rows = read_convergence_csv(convergence_csv(run_convergence(cfg())))
    assert {r["candidate"] for r in ghz_rows} == {"1"}


def test_workers_do_not_change_output():
    assert convergence_csv(run_convergence(cfg(workers=4))) == convergence_csv(run_convergence(cfg()))


def test_estimation_errors_are_recorded():
    # two end channels give the Z scheme no informative pair
    results = run_convergence(cfg(Z_BASIS, theta=(0.8, 0.3)))
    rows = read_convergence_csv(convergence_csv(results))
    failed = [r for r in rows if r["error"]]
    assert failed and all(r["theta_hat"] == "" for r in failed)
    assert any("EstimationFailedError" in r["error"] for r in failed)


def test_reader_checks_header():
    with pytest.raises(QntomoError):
        read_convergence_csv("N,trial\n")
