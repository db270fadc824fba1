#!/usr/bin/env python3
"""Scaling study of the first-correction witness: prints G(n), the
saturation-corrected constant, and the self-to-cross term ratio over a
carrier range, then the fitted slopes.

Usage:
    python3 scripts/witness_scaling.py [--p 8] [--n-min 4] [--n-max 7]
            [--rtol 1e-5] [--panels 6]
"""

import argparse
import sys
import time
from fractions import Fraction

from swil.besov import fit_log2_slope, relative_spread
from swil.construction import index_family, u1_witness


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=Fraction, default=Fraction(8))
    ap.add_argument("--n-min", type=int, default=4)
    ap.add_argument("--n-max", type=int, default=7)
    ap.add_argument("--rtol", type=float, default=1e-5)
    ap.add_argument("--panels", type=int, default=6)
    args = ap.parse_args()

    fam = index_family(args.p)
    ns = list(range(args.n_min, args.n_max + 1))
    print(f"{'n':>3} {'T0':>13} {'witness':>13} {'G(n)':>13} "
          f"{'corrected':>13} {'self/cross':>11} {'secs':>6}")
    rows = []
    for n in ns:
        tic = time.perf_counter()
        wit = u1_witness(n, fam, rtol=args.rtol, panels=args.panels,
                         inner_rtol=args.rtol)
        rows.append(wit)
        print(f"{n:>3} {fam.t0(n):>13.6e} {wit.cross_total:>13.6e} "
              f"{wit.g_value:>13.6e} {wit.corrected_constant:>13.6e} "
              f"{wit.self_to_cross:>11.3e} {time.perf_counter() - tic:>6.1f}")

    g_vals = [w.g_value for w in rows]
    print(f"\nG(n) relative spread      {relative_spread(g_vals):.4f}")
    print(f"corrected spread          {relative_spread([w.corrected_constant for w in rows]):.2e}")
    if len(ns) >= 2:
        print(f"witness slope (log2/n)    {fit_log2_slope(ns, [w.cross_total for w in rows]).slope:+.4f}")
        print(f"self/cross slope          {fit_log2_slope(ns, [w.self_to_cross for w in rows]).slope:+.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
