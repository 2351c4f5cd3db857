"""Command-line entry point: ``qntomo <command> --config FILE``.

Exit codes: 0 success, 1 invalid input or configuration, 2 estimation
failure, 3 invariant-suite failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, check_channel_model, load_config
from .errors import EstimationError, QntomoError
from .estimators import estimate
from .experiments import (
    convergence_csv,
    derive_seed,
    matrix_csv,
    outcome_distribution,
    run_convergence,
    simulate_record,
)
from .fisher import EigenvalueModel, qfim
from .measurement import OutcomeRecord
from .topology import StarTopology
from .validation import default_suite

log = logging.getLogger("qntomo")

EXIT_OK, EXIT_INVALID, EXIT_ESTIMATION, EXIT_INVARIANT = 0, 1, 2, 3


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(
        seed=args.seed,
        out_dir=Path(args.out) if args.out else None,
        scheme=args.scheme.upper() if args.scheme else None,
        regime=args.regime,
    )
    if args.scheme:
        check_channel_model(cfg)
    return cfg


def _out_dir(cfg: ExperimentConfig) -> Path:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return cfg.out_dir


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = _out_dir(cfg)
    dist = outcome_distribution(cfg)
    for i, shots in enumerate(cfg.shots):
        for t in range(cfg.trials):
            record = simulate_record(cfg, shots, derive_seed(cfg.seed, i, t), dist)
            path = record.write(out / f"record_N{shots}_t{t}.csv")
            log.info("wrote %s", path)
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = _load(args) if args.config else None
    if args.record:
        record = OutcomeRecord.read(args.record)
    elif cfg is not None:
        record = simulate_record(cfg, cfg.shots[-1], derive_seed(cfg.seed, len(cfg.shots) - 1, 0))
    else:
        raise QntomoError("estimate needs --record or --config")
    scheme = args.scheme or (record.scheme if record.scheme else cfg.scheme if cfg else None)
    regime = args.regime or (cfg.regime if cfg else "low")
    report = estimate(record, scheme, regime)
    out = Path(args.out) if args.out else (cfg.out_dir if cfg else Path("."))
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "estimate.csv", "w", newline="") as fh:
        fh.write("# qntomo-estimate v1\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["candidate"] + report.csv_header())
        for c, cand in enumerate(report.candidates, start=1):
            row = report.csv_row(record.seed)
            row[2 : 2 + cand.size] = [repr(float(v)) for v in cand]
            writer.writerow([c] + row)
    (out / "estimate.json").write_text(report.to_json() + "\n")
    print(report.to_json())
    return EXIT_OK


def cmd_convergence(args) -> int:
    cfg = _load(args)
    out = _out_dir(cfg)
    results = run_convergence(cfg)
    (out / "convergence.csv").write_text(convergence_csv(results))
    failed = sum(r.report is None for r in results)
    if failed:
        log.warning("%d of %d trials failed to estimate; see the error column", failed, len(results))
    log.info("wrote %s", out / "convergence.csv")
    return EXIT_OK


def cmd_qfim(args) -> int:
    cfg = _load(args)
    out = _out_dir(cfg)
    theta = cfg.thetas
    result = qfim(EigenvalueModel(cfg.scheme, theta.size), theta)
    (out / "F.csv").write_text(matrix_csv(result.F, "qntomo-qfim v1"))
    diag_path = out / "qfim_diagnostic.json"
    if result.singular:
        diagnostic = {
            "singular": True,
            "eigenvalues": result.eigenvalues.tolist(),
            "null_space": result.null_space.T.tolist(),
            "theta": theta.tolist(),
            "scheme": cfg.scheme,
        }
        diag_path.write_text(json.dumps(diagnostic, indent=2) + "\n")
        print(json.dumps(diagnostic, indent=2))
        return EXIT_OK
    if diag_path.exists():
        diag_path.unlink()
    (out / "F_inv.csv").write_text(matrix_csv(result.F_inverse, "qntomo-qfim-inverse v1"))
    with open(out / "qcrb.csv", "w", newline="") as fh:
        fh.write("# qntomo-qcrb v1\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["N", "param", "theta", "bound_variance", "bound_std"])
        for shots in cfg.shots:
            for j, b in enumerate(result.qcrb(shots)):
                writer.writerow([shots, j, repr(float(theta[j])), repr(float(b)), repr(float(np.sqrt(b)))])
    print(matrix_csv(result.F, "F"), end="")
    return EXIT_OK


def cmd_validate(args) -> int:
    n = 3
    if args.config:
        cfg = _load(args)
        if isinstance(cfg.topology, StarTopology):
            n = cfg.topology.n
    if n > 6:
        raise QntomoError(f"dense validation is limited to n <= 6, got n={n}")
    results = default_suite(n)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "convergence": cmd_convergence,
    "qfim": cmd_qfim,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qntomo", description="Quantum network tomography on star networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=name not in ("validate", "estimate"))
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--scheme")
        p.add_argument("--regime", choices=("low", "high"))
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "estimate":
            p.add_argument("--record", type=Path, help="outcome record CSV to estimate from")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except EstimationError as exc:
        print(f"estimation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except QntomoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
