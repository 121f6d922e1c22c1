#!/usr/bin/env python3
"""Sweep the flattening falsification across domain sizes.

For each power-of-two n, sample random flat maps and record the worst
preserved distance min_i ||phi(f_i - f_1)||_1; it stays under 2/sqrt(n),
so the preserved distance vanishes as n grows and no flat map can keep the
family's pairwise distances bounded away from zero.

Usage: python scripts/flattening_sweep.py [--trials 500] [--alpha 0.99]
"""

import argparse
import sys
import time

from ldpselect import run_flattening_trials


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--alpha", type=float, default=0.99)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--nmax", type=int, default=128)
    args = ap.parse_args()

    print(f"trials={args.trials} alpha={args.alpha} seed={args.seed}")
    print(f"{'n':>5} {'worst':>8} {'bound':>8} {'worst/bound':>12} {'frob dev':>10} {'sec':>6}")
    n = 8
    while n <= args.nmax:
        t0 = time.perf_counter()
        rep = run_flattening_trials(n, trials=args.trials, alpha=args.alpha, seed=args.seed)
        print(
            f"{n:>5} {rep.worst_min_distance:>8.4f} {rep.bound:>8.4f} "
            f"{rep.worst_min_distance / rep.bound:>12.3f} {rep.max_frobenius_deviation:>10.1e} "
            f"{time.perf_counter() - t0:>6.2f}"
        )
        n *= 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
