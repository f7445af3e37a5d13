"""Trace R*(C) next to the public-signal baseline and the explicit mechanisms.

Writes one CSV row per C on the sweep, then one row per mechanism point
(guess-for-discount on uniform(0,1), heavy tail on er:3e7, hidden price on
exponential(1)) so the whole tradeoff picture fits in one file.
"""

import argparse
import csv
import sys

from pricing_lab import frontier, mechanisms
from pricing_lab.cli import fmt
from pricing_lab.prior import EqualRevenue, Exponential, Uniform


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=101)
    ap.add_argument("--output", help="CSV path (default: standard output)")
    args = ap.parse_args()

    rows = []
    for pt in frontier.frontier_sweep(0.0, 1.0, args.steps):
        rows.append(["frontier", fmt(pt.C), fmt(pt.R), fmt(frontier.baseline(pt.C).R)])
    sym = frontier.symmetric_point()
    rows.append(["symmetric", fmt(sym.C), fmt(sym.R), fmt(1.0 - sym.C)])

    points = [mechanisms.guess_discount_eval(Uniform(0.0, 1.0)),
              mechanisms.hidden_price_eval(Exponential(1.0))]
    er = EqualRevenue(3e7)
    for eps in (0.1, 0.2, 0.5):
        points.append(mechanisms.heavy_tail_eval(er, mechanisms.heavy_tail_params(er, eps)))
    for rep in points:
        rows.append([rep.mechanism, fmt(rep.C), fmt(rep.R), fmt(1.0 - rep.C)])

    out = open(args.output, "w", newline="") if args.output else sys.stdout
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["series", "C", "R", "baseline_R"])
    w.writerows(rows)
    if args.output:
        out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
