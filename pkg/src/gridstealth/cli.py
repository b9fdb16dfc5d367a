"""Command line entry point: ``gridstealth run`` and ``gridstealth validate``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .cases import resolve_case
from .dc_model import build_jacobian, export_csv
from .errors import GridStealthError, NumericalError
from .experiments import EXPERIMENTS, ExperimentConfig, apply_setting, parse_config, run_experiments

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors; argparse would exit with 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridstealth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run experiment sweeps and write CSV datasets")
    run.add_argument("--config", help="flat key = value configuration file")
    run.add_argument("--experiment", help=f"comma list of {', '.join(EXPERIMENTS)} or 'all'")
    run.add_argument("--case", help="case file path or bundled name (case2, case3, case5, case30)")
    run.add_argument("--seed", help="base seed (unsigned 64-bit)")
    run.add_argument("--out", help="output directory")
    run.add_argument("--alpha", help="target false-alarm rate for detection")
    run.add_argument("--trials", help="sample-covariance realizations per point")
    run.add_argument("--rho", help="comma list of correlation strengths")
    run.add_argument("--snr", help="comma list of SNR values in dB")
    run.add_argument("--k", help="comma list of training-set sizes")
    run.add_argument("--n-mc", dest="n_mc", help="Monte Carlo blocks for detection")
    run.add_argument("--blocks", help="comma list of LRT block sizes")
    run.add_argument("--jobs", help="worker threads")

    val = sub.add_parser("validate", help="parse a case and report on its Jacobian")
    val.add_argument("--case", required=True)
    val.add_argument("--export-h", metavar="CSV", help="also write H to this CSV file")
    return parser


def _run(args) -> int:
    config = ExperimentConfig()
    if args.config:
        config = parse_config(Path(args.config).read_text(encoding="utf-8"), config)
    for key in ("experiment", "case", "seed", "out", "alpha", "trials", "rho", "snr", "k",
                "n_mc", "blocks", "jobs"):
        value = getattr(args, key)
        if value is not None:
            apply_setting(config, key, value)
    written = run_experiments(config)
    for kind, path in written.items():
        print(f"{kind}: {path}")
    return EXIT_OK


def _validate(args) -> int:
    case, _ = resolve_case(args.case)
    jac = build_jacobian(case)
    full = jac.full_matrix()
    n_inj = len(case.buses)
    print(f"case: {args.case}")
    print(f"buses: {len(case.buses)}  branches: {len(case.branches)} "
          f"({len(case.in_service_branches)} in service)  slack: {case.slack_bus}")
    print(f"H: {jac.M} x {jac.N}  rank: {np.linalg.matrix_rank(jac.matrix)}")
    print(f"max |injection row sum|: {np.abs(full[:n_inj].sum(axis=1)).max():.3e}")
    if args.export_h:
        export_csv(jac, args.export_h)
        print(f"H written to {args.export_h}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _run(args) if args.command == "run" else _validate(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (GridStealthError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
