#!/usr/bin/env python3
"""Full inflation sweep: witness quadrature plus nonlinear solves over a
carrier range, with CSV/summary/plot emission and bound verification.

Usage:
    python3 scripts/run_inflation_sweep.py out/sweep_p8 [--p 8] [--n 4 5 6]
            [--mode both] [--steps 128] [--workers 1]
"""

import argparse
import sys
from fractions import Fraction

from swil.experiment import (
    ExperimentConfig,
    bounds_passed,
    emit,
    run_sweep,
    verify_bounds,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir")
    ap.add_argument("--p", type=Fraction, default=Fraction(8))
    ap.add_argument("--n", type=int, nargs="+", default=[4, 5, 6])
    ap.add_argument("--mode", default="both", choices=("witness", "solve", "both"))
    ap.add_argument("--steps", type=int, default=128)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    cfg = ExperimentConfig(
        p=args.p,
        n_list=tuple(args.n),
        mode=args.mode,
        steps=args.steps,
        workers=args.workers,
        out_dir=args.out_dir,
    )
    report = run_sweep(cfg)
    paths = emit(report, args.out_dir)
    print(f"wrote {paths['csv']}")
    print(f"wrote {paths['summary']}")
    print(f"wrote {paths['plot']}")
    for row in report.rows:
        if row.error:
            print(f"n={row.n} FAILED: {row.error}")
    checks = verify_bounds(report)
    for chk in checks:
        print(f"{'PASS' if chk.passed else 'FAIL'} {chk.name}: {chk.detail}")
    return 0 if bounds_passed(checks) else 1


if __name__ == "__main__":
    sys.exit(main())
