#!/usr/bin/env python
"""Interference-dip sweep: <n> and g2(0) against omega2/omega1, written to CSV."""
import argparse

import numpy as np

from ladder_cavity.sweep import preset_fig2, run_sweep, write_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fig2.csv")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    rows = run_sweep(preset_fig2(), workers=args.workers)
    write_csv(rows, args.out)
    means = np.array([r.mean_n for r in rows])
    i = int(np.argmin(means))
    print(f"minimum <n> = {means[i]:.3e} at omega2/omega1 = {rows[i].sweep_value:.5f}")
    for j in (i - 1, i + 1):
        print(f"  neighbour {rows[j].sweep_value:.5f}: <n> = {means[j]:.3e}, g2(0) = {rows[j].g2_zero:.4f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
