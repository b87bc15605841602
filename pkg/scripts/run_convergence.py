#!/usr/bin/env python3
"""Refinement study against the analytic oracles.

Prints one table per mesh family: mean edge length, Linf error, mean relative
error and the observed convergence order between consecutive levels.
"""

import argparse

from heatdist.oracle import convergence_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=float, default=1.0, help="time-step multiplier")
    ap.add_argument("--icosphere-levels", default="2,3,4,5")
    ap.add_argument("--grid-levels", default="17,33,65")
    args = ap.parse_args()

    studies = [
        ("icosphere", [int(v) for v in args.icosphere_levels.split(",")]),
        ("grid", [int(v) for v in args.grid_levels.split(",")]),
    ]
    for family, levels in studies:
        print(f"\n{family} (m = {args.m:g})")
        print(f"{'level':>6} {'h':>10} {'Linf':>10} {'mean rel':>10} {'order':>7}")
        for row in convergence_study(family, levels, m=args.m):
            order = "" if row.observed_order != row.observed_order else f"{row.observed_order:7.2f}"
            print(
                f"{row.level:>6} {row.h:10.4e} {row.linf_error:10.4e} "
                f"{row.mean_relative_error:10.4e} {order}"
            )


if __name__ == "__main__":
    main()
