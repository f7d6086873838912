#!/usr/bin/env python3
"""Print the minimum base-composition deviation the single-base estimator
needs before its concentration guarantee kicks in, over a rate x length grid.

Each cell is the smallest usable |f_A/G - 0.25| for the requested relative
error tolerance; compositions closer to uniform than this give no guarantee.
"""

import argparse
import sys

from mutrate import min_deviation_sequence


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.1, help="relative error tolerance")
    ap.add_argument("--rates", default="0.01,0.03,0.05,0.10,0.20,0.50")
    ap.add_argument("--lengths", default="1e4,1e5,1e6,1e7")
    args = ap.parse_args(argv)

    rates = [float(r) for r in args.rates.split(",")]
    lengths = [float(g) for g in args.lengths.split(",")]

    header = "p \\ G " + "".join(f"{g:>12.0e}" for g in lengths)
    print(f"minimum usable |f_A/G - 0.25| at eps = {args.eps}")
    print(header)
    for p in rates:
        cells = "".join(f"{min_deviation_sequence(p, args.eps, g):>12.4g}" for g in lengths)
        print(f"{p:<6.2f}{cells}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
