#!/usr/bin/env python3
"""
Write a pair of configurations with Delta(1) = 0.

b is root-found so that the first mode is degenerate for alpha = 0.5,
beta = 1.5, a = 2 and lambda_1 = 1. The feasible file uses phi = sin 2x
(orthogonal to X_1); the infeasible one uses phi = sin x.
"""
import argparse
import json
import sys
from pathlib import Path

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent.absolute()
sys.path.insert(0, str(PROJECT_ROOT / "src"))

from fractional_transmission.processing.mode_solver import find_degenerate_b  # noqa: E402

ALPHA, BETA, A, LAMBDA_1 = 0.5, 1.5, 2.0, 1.0


def degenerate_config(b: float, sine_coeffs: list) -> dict:
    return {
        "s": 1,
        "alpha": ALPHA,
        "beta": BETA,
        "a": A,
        "b": b,
        "p0": 0.0,
        "phi": {"sine_coeffs": sine_coeffs},
        "K": 8,
        "grid": {"nx": 32, "ny": 32},
    }


def main() -> int:
    parser = argparse.ArgumentParser(description="Write degenerate demo configurations")
    parser.add_argument("--out-dir", default=str(PROJECT_ROOT / "configs"))
    args = parser.parse_args()

    b = find_degenerate_b(ALPHA, BETA, A, LAMBDA_1)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, coeffs in (("degenerate_feasible", [0.0, 1.0]), ("degenerate_infeasible", [1.0])):
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(degenerate_config(b, coeffs), indent=2) + "\n")
        print(f"Wrote {path} (b = {b:.17g})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
