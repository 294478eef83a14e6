#!/usr/bin/env python3
"""Trained depth-2 nets versus the constructed depth-3 net at one dimension.

Trains a width sweep of one-hidden-layer networks against the maximum and
compares their held-out error with the fixed-width depth-3 construction,
whose accuracy comes from weight magnitude rather than width.
"""

import argparse
import csv
import sys

from maxnet import (
    DistributionSpec,
    alpha_for_accuracy,
    best_cells,
    depth3_max,
    mc_l2_error,
    row_max,
    stats,
    width_sweep,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=int, default=8)
    parser.add_argument("--widths", default="2,4,8,16,32,64")
    parser.add_argument("--epsilon", type=float, default=1e-5)
    parser.add_argument("--steps", type=int, default=4000)
    parser.add_argument("--restarts", type=int, default=3)
    parser.add_argument("--n", type=int, default=2 * 10**5)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--out", default="-")
    args = parser.parse_args()

    dist = DistributionSpec.uniform_box(args.d, seed=args.seed)
    widths = [int(w) for w in args.widths.split(",")]
    cells = width_sweep(
        2, widths, args.d, dist,
        seeds=tuple(range(args.restarts)), steps=args.steps,
        heldout_n=args.n, heldout_seed=args.seed + 1,
    )
    best = best_cells(cells)

    alpha = alpha_for_accuracy(args.d, 1.0, args.epsilon)
    constructed = depth3_max(args.d, alpha)
    est = mc_l2_error(constructed, row_max, dist, max(args.n, 10**6),
                      seed=args.seed + 2)

    rows = [["depth", "width", "test_mse", "ci_low", "ci_high", "note"]]
    for width in widths:
        cell = best[width]
        rows.append([2, width, repr(cell.test_mse), repr(cell.ci_low),
                     repr(cell.ci_high), "trained best-of-seeds"])
    rows.append([3, stats(constructed).width, repr(est.mean_sq_error),
                 repr(est.ci95[0]), repr(est.ci95[1]),
                 f"constructed alpha={alpha:.3g}"])

    sink = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    csv.writer(sink, lineterminator="\n").writerows(rows)
    if sink is not sys.stdout:
        sink.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
