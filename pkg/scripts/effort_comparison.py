"""Fronts of the three methods on small instances, with their effort.

Prints one row per (instance, method): points, mono-problem invocations,
underlying MILP/LP calls, wall time and the front metrics.

    python scripts/effort_comparison.py [--preset illustrative] [--seeds 1-3] [--grid 4]
"""

import argparse
import logging

from sscmo.cli import METHODS, _seeds, bench, format_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="illustrative", choices=("std", "illustrative", "tiny"))
    ap.add_argument("--seeds", default="1-3")
    ap.add_argument("--periods", type=int, default=3)
    ap.add_argument("--grid", type=int, default=4)
    ap.add_argument("--time-limit", type=float, default=60.0)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    rows = bench(["STD"], [args.periods], _seeds(args.seeds), list(METHODS), args.grid, 1e-3,
                 args.time_limit, 1e-4, "highs", preset=args.preset)
    print(format_table(rows))
    total = {m: [0, 0.0] for m in METHODS}
    for r in rows:
        total[r["method"]][0] += r["invocations"]
        total[r["method"]][1] += r["time_s"]
    for m, (inv, secs) in total.items():
        print(f"total {m:5}  invocations {inv:4d}  time {secs:9.2f}s")


if __name__ == "__main__":
    main()
