"""Large-n cells for the dynamic uniform with gamma = 1.5 and r = 3.

n = 1e8 needs roughly 2 GB of memory per replication; the default runs 1e7 only.
"""

import argparse
import time

import numpy as np

from turing_ci.distributions import DynamicUniform
from turing_ci.harness import simulate_cell
from turing_ci.intervals import Method


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=float, nargs="+", default=[1e7])
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    methods = [Method.NORMAL, Method.POISSON, Method.HEURISTIC]
    print(f"{'CI':<10} {'n':>8} {'coverage':>10} {'mean width':>12}")
    for n in (int(x) for x in args.n):
        t0 = time.time()
        cell = simulate_cell(DynamicUniform(1.5), n, [3], methods, args.reps, master_seed=args.seed, workers=args.workers)
        for row in cell.rows:
            hits = round(row.coverage * args.reps)
            print(f"{row.method.value:<10} {n:>8.0e} {hits:>5}/{args.reps:<4} {row.mean_width:>12.4g}")
        zeros = int(np.sum(cell.estimates == 0))
        print(f"  T_3 = 0 in {zeros}/{args.reps} replications ({time.time() - t0:.1f}s)")


if __name__ == "__main__":
    main()
