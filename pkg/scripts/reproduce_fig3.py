#!/usr/bin/env python
"""Upper-state population and <n> with the cavity on the upper transition only."""
import argparse

from ladder_cavity.sweep import preset_fig3, run_sweep, write_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="fig3.csv")
    parser.add_argument("--ratio-range", type=float, nargs=2, default=(0.1, 10.0))
    parser.add_argument("--count", type=int, default=101)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    rows = run_sweep(preset_fig3(tuple(args.ratio_range), args.count), workers=args.workers)
    write_csv(rows, args.out)
    best = max(rows, key=lambda r: r.s33)
    inverted = [r.sweep_value for r in rows if r.s33 > 0.5]
    print(f"max S33 = {best.s33:.4f} at omega2/omega1 = {best.sweep_value:.4f} (r_zero = {best.r_zero:.4f})")
    if inverted:
        print(f"S33 > 1/2 for omega2/omega1 in [{min(inverted):.3f}, {max(inverted):.3f}]")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
