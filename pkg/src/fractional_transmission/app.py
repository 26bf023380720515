#!/usr/bin/env python3
"""
Fractional Transmission - spectral solver for Problem D

Command-line surface: Mittag-Leffler evaluation, uniqueness scans, field
solves, verification reports and eigenvalue tables. Data goes to stdout or
files; logs go to stderr.
"""
import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd

from .exceptions import FractionalTransmissionError, Infeasible
from .processing.config import ProblemConfig, load_config
from .processing.mode_solver import ModeSolver
from .special.mittag_leffler import MittagLeffler, no_real_zeros
from .spectral.basis import analytic_eigens, asymptotic_fit, numeric_eigens_s1, orthonormality_defect
from .verification.suite import VerifyLevel, run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_UNIQUENESS = 3
EXIT_INFEASIBLE = 4
EXIT_VERIFICATION = 5

CSV_OPTIONS = {"index": False, "float_format": "%.17g", "lineterminator": "\n"}


def configure_logging(verbosity: int) -> None:
    """Log to stderr; stdout carries command output."""
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler(sys.stderr)],
    )


def _jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


def dump_json(document: Any) -> str:
    return json.dumps(_jsonable(document), sort_keys=True, indent=2, allow_nan=False)


def cmd_ml(args: argparse.Namespace) -> int:
    if args.action == "zeros":
        if 1.0 < args.mu < 2.0 and no_real_zeros(args.mu, args.eta) and not args.scan:
            logger.info(f"eta={args.eta} >= 3 mu / 2: no real zeros, scan skipped")
            print("none")
            return EXIT_OK
        scan = MittagLeffler(args.tol).real_zeros(args.mu, args.eta, args.tmax, step=args.step)
        for zero in scan.zeros:
            print(f"{zero:.17g}")
        print(f"h={scan.max_zero:.17g}" if scan.max_zero is not None else "none")
        return EXIT_OK

    if args.z is None:
        raise argparse.ArgumentTypeError("--z is required")
    result = MittagLeffler(args.tol).evaluate(args.mu, args.eta, args.z)
    print(f"{result.value:.17g} {result.abs_error_bound:.3e} {result.method.value}")
    return EXIT_OK


def _emit_summary(summary: dict, path: Optional[str]) -> None:
    text = dump_json(summary)
    if path:
        Path(path).write_text(text + "\n")
        logger.info(f"Summary written to {path}")
    else:
        print(text, file=sys.stderr)


def cmd_delta(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    report = ModeSolver(cfg).uniqueness_scan(kmax=args.kmax)
    report.to_frame().to_csv(sys.stdout, **CSV_OPTIONS)
    _emit_summary(report.to_dict(), args.summary)
    if report.flagged and args.strict:
        logger.error(f"Uniqueness fails: Delta(k) vanishes for k in {report.flagged}")
        return EXIT_UNIQUENESS
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    solver = ModeSolver(load_config(args.config))
    try:
        solution = solver.solve()
    except Infeasible as exc:
        logger.error(str(exc))
        print(dump_json({"infeasible": exc.indices, "magnitudes": exc.magnitudes}))
        return EXIT_INFEASIBLE

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    solution.to_frame().to_csv(out, **CSV_OPTIONS)
    metadata = solution.metadata()
    metadata["transmission"] = solver.transmission_check(solution).to_dict()
    meta_path = out.with_name(out.name + ".meta.json")
    meta_path.write_text(dump_json(metadata) + "\n")
    logger.info(f"Field written to {out}, metadata to {meta_path}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    frame = None
    if args.field:
        frame = pd.read_csv(args.field, float_precision="round_trip")
    report = run_verification(cfg, VerifyLevel(args.level), field_frame=frame)
    print(dump_json(report.to_dict()))
    if not report.passed:
        logger.error(f"Verification failed: {', '.join(report.failures)}")
        return EXIT_VERIFICATION
    return EXIT_OK


def _eigens_for(cfg: ProblemConfig, kmax: Optional[int]):
    if kmax is None or kmax == cfg.K:
        return cfg.eigens
    if cfg.is_numeric:
        return numeric_eigens_s1(cfg.p0, kmax)
    return analytic_eigens(cfg.s, float(cfg.p0), kmax)


def cmd_eigs(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    eigs = _eigens_for(cfg, args.kmax)
    frame = pd.DataFrame({"k": [p.k for p in eigs], "lambda_k": [p.lambda_k for p in eigs]})
    frame.to_csv(sys.stdout, **CSV_OPTIONS)
    summary = {"kmax": len(eigs), "orthonormality_defect": orthonormality_defect(eigs),
               "basis": "analytic" if eigs[0].is_analytic else "numeric"}
    if len(eigs) >= 6:
        fit = asymptotic_fit(eigs, cfg.s)
        summary["asymptotic_fit"] = {"c0": fit.c0, "c2": fit.c2, "residual": fit.residual}
    _emit_summary(summary, args.summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fractional-transmission",
                                     description="Spectral solver for Problem D")
    parser.add_argument('-v', '--verbose', action='count', default=0, help='More logging (repeatable)')
    subparsers = parser.add_subparsers(dest='command', help='Available commands')
    subparsers.required = True

    # ML command
    ml_parser = subparsers.add_parser('ml', help='Evaluate E_{mu,eta}(z) or scan its real zeros')
    ml_parser.add_argument('action', nargs='?', choices=['value', 'zeros'], default='value')
    ml_parser.add_argument('--mu', type=float, required=True)
    ml_parser.add_argument('--eta', type=float, required=True)
    ml_parser.add_argument('--z', type=float, help='Argument (value mode)')
    ml_parser.add_argument('--tmax', type=float, default=100.0, help='Scan interval (zeros mode)')
    ml_parser.add_argument('--step', type=float, help='Scan step override')
    ml_parser.add_argument('--scan', action='store_true', help='Scan even when no zeros are guaranteed')
    ml_parser.add_argument('--tol', type=float, default=1e-10)
    ml_parser.set_defaults(handler=cmd_ml)

    # Delta command
    delta_parser = subparsers.add_parser('delta', help='Scan the uniqueness determinant Delta(k)')
    delta_parser.add_argument('config')
    delta_parser.add_argument('--kmax', type=int)
    delta_parser.add_argument('--strict', action='store_true', help='Exit 3 on degenerate modes')
    delta_parser.add_argument('--summary', help='Write the JSON summary here instead of stderr')
    delta_parser.set_defaults(handler=cmd_delta)

    # Solve command
    solve_parser = subparsers.add_parser('solve', help='Assemble the series solution')
    solve_parser.add_argument('config')
    solve_parser.add_argument('--out', required=True, help='CSV output path')
    solve_parser.set_defaults(handler=cmd_solve)

    # Verify command
    verify_parser = subparsers.add_parser('verify', help='Run the verification report')
    verify_parser.add_argument('config')
    verify_parser.add_argument('--level', choices=[lvl.value for lvl in VerifyLevel], default='fast')
    verify_parser.add_argument('--field', help='Re-check a CSV written by solve')
    verify_parser.set_defaults(handler=cmd_verify)

    # Eigs command
    eigs_parser = subparsers.add_parser('eigs', help='Tabulate the eigenvalues')
    eigs_parser.add_argument('config')
    eigs_parser.add_argument('--kmax', type=int)
    eigs_parser.add_argument('--summary', help='Write the JSON summary here instead of stderr')
    eigs_parser.set_defaults(handler=cmd_eigs)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the application."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except (FractionalTransmissionError, argparse.ArgumentTypeError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
