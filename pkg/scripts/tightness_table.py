"""Sandwich R*(C) <= Rev(F_beta, C) / T <= min(1, g(beta; C)) over a (C, beta) grid.

Each row solves the posted-price LP on a discretised F_beta and reports how
far the LP ratio sits from the two bounds. The delta column is the slack the
discretisation is allowed.
"""

import argparse
import sys

from pricing_lab.verify import parallel_map
from pricing_lab.worstcase import tightness_check


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c", type=float, nargs="+", default=[0.25, 0.5, 0.75, 1.0])
    ap.add_argument("--beta", type=float, nargs="+", default=[0.25, 0.5, 1.0, 2.0, 4.0, 8.0])
    ap.add_argument("--grid", type=int, default=200)
    args = ap.parse_args()

    cases = [(c, b) for c in args.c for b in args.beta]
    reps = parallel_map(lambda cb: tightness_check(cb[0], cb[1], 1.0, args.grid), cases)
    print(f"{'C':>5} {'beta':>6} {'R*(C)':>9} {'LP ratio':>9} {'min(1,g)':>9} {'delta':>6}  ok")
    failed = 0
    for r in reps:
        failed += not r.ok
        print(f"{r.C:5.2f} {r.beta:6.2f} {r.lower:9.6f} {r.ratio:9.6f} {r.upper:9.6f} "
              f"{r.delta:6.3f}  {'yes' if r.ok else 'NO'}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
