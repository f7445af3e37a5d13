"""Time the seeded corpus solve and report the worst duality and lift errors.

Useful for checking that the LP layer stays inside its runtime budget as
the corpus grows, and how much PRICING_LAB_THREADS helps.
"""

import argparse
import os
import sys
import time

from pricing_lab import verify


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[25, 50, 100, 200])
    ap.add_argument("--threads", type=int, nargs="+", default=[1, 0])
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    print(f"{'size':>5} {'threads':>7} {'solve s':>8} {'duality':>9} {'lift':>9}")
    for size in args.sizes:
        for threads in args.threads:
            os.environ["PRICING_LAB_THREADS"] = str(threads)
            verify._CACHE.clear()
            t0 = time.perf_counter()
            solves = verify.solve_corpus(args.seed, size)
            elapsed = time.perf_counter() - t0
            duality = max(r.max_violation for r in verify.suite_duality(solves))
            lift = verify.suite_lift(solves)[0].max_violation
            label = threads if threads else f"auto({verify.thread_count()})"
            print(f"{size:5d} {label!s:>7} {elapsed:8.2f} {duality:9.1e} {lift:9.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
