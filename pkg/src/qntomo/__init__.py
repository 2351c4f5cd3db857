"""Quantum network tomography of Pauli channels on star networks."""

from __future__ import annotations

from .distribution import GHZ_X, GHZ_Y, GHZ_Z, SCHEMES, Z_BASIS, distribute, flip_distribution, preset, scheme_state
from .errors import QntomoError
from .estimators import EstimateReport, estimate, estimate_ghz_scheme, estimate_z_scheme
from .fisher import EigenvalueModel, qcrb_check, qfim
from .measurement import OutcomeRecord, marginals, sample
from .topology import RootedTree, StarTopology, build_star, build_tree

__version__ = "0.1.0"

__all__ = [
    "GHZ_X",
    "GHZ_Y",
    "GHZ_Z",
    "SCHEMES",
    "Z_BASIS",
    "EigenvalueModel",
    "EstimateReport",
    "OutcomeRecord",
    "QntomoError",
    "RootedTree",
    "StarTopology",
    "build_star",
    "build_tree",
    "distribute",
    "estimate",
    "estimate_ghz_scheme",
    "estimate_z_scheme",
    "flip_distribution",
    "marginals",
    "preset",
    "qcrb_check",
    "qfim",
    "sample",
    "scheme_state",
]
