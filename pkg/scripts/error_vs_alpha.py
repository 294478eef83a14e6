#!/usr/bin/env python3
"""Accuracy through weight magnitude: error of the depth-3 net versus alpha.

The architecture is fixed at width d(d+1); only the weight scale grows.
Emits one CSV row per alpha with the Monte Carlo squared error on the unit
cube; the guarantee alpha = 2 d^2 (d+1)^2 / epsilon predicts the decay rate.
"""

import argparse
import csv
import sys

from maxnet import DistributionSpec, depth3_max, mc_l2_error, row_max


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=int, default=8)
    parser.add_argument("--alphas", default="1e1,1e2,1e3,1e4,1e5,1e6")
    parser.add_argument("--n", type=int, default=10**6)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--out", default="-")
    args = parser.parse_args()

    dist = DistributionSpec.uniform_box(args.d, seed=args.seed)
    rows = [["d", "alpha", "n", "mse", "std_error", "ci_low", "ci_high", "seed"]]
    for text in args.alphas.split(","):
        alpha = float(text)
        est = mc_l2_error(depth3_max(args.d, alpha), row_max, dist, args.n)
        rows.append([args.d, repr(alpha), args.n, repr(est.mean_sq_error),
                     repr(est.std_error), repr(est.ci95[0]), repr(est.ci95[1]),
                     args.seed])
        print(f"alpha={alpha:>10.3g}  mse={est.mean_sq_error:.3e}", file=sys.stderr)

    sink = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    csv.writer(sink, lineterminator="\n").writerows(rows)
    if sink is not sys.stdout:
        sink.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
