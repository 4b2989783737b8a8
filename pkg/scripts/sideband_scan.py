#!/usr/bin/env python
"""Full dressed-Hamiltonian scan of the cavity detuning at the interference
condition; only the outer sidebands +/-2 Omega stay dark."""
import argparse
import math

import numpy as np

from ladder_cavity.dressed_model import BareParams
from ladder_cavity.sweep import RunConfig, SweepGrid, run_sweep, write_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--big-omega", type=float, default=50.0)
    parser.add_argument("--g", type=float, default=1.0, help="g1 = g2")
    parser.add_argument("--kappa", type=float, default=1.0)
    parser.add_argument("--count", type=int, default=161)
    parser.add_argument("--oracle-nmax", type=int, default=12)
    parser.add_argument("--out", default="sideband_scan.csv")
    args = parser.parse_args()

    w = args.big_omega / math.sqrt(2)
    cfg = RunConfig(
        base=BareParams(1.0, 1.0, args.kappa, args.g, args.g, w, w),
        sweep_variable="delta_c_over_omega",
        sweep_grid=SweepGrid(-2.5, 2.5, args.count),
        oracle_n_max=args.oracle_nmax,
        output_path=args.out,
    )
    rows = run_sweep(cfg)
    write_csv(rows, args.out)
    grid = np.array([r.sweep_value for r in rows])
    for target in (-2, -1, 0, 1, 2):
        r = rows[int(np.argmin(np.abs(grid - target)))]
        print(f"delta_c/Omega = {r.sweep_value:+.3f}: <n> = {r.mean_n:.3e}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
