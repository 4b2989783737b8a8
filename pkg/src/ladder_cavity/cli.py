"""Command-line entry point: ``ladder-cavity {simulate,sweep,fig2,fig3,oracle-check}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .dressed_model import BareParams, derive_dressed, validity_report
from .fock_system import SolverError
from .sweep import (
    ConfigError,
    RunConfig,
    dump_config,
    load_config,
    oracle_report,
    preset_fig2,
    preset_fig3,
    run_sweep,
    solve_projected,
    write_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_ORACLE = 0, 2, 3, 4

PARAM_FLAGS = ("gamma32", "gamma21", "kappa", "g1", "g2", "omega1", "omega2")


def _common(parser: argparse.ArgumentParser, config_required: bool = False):
    parser.add_argument("--config", required=config_required, help="TOML run configuration")
    parser.add_argument("--out", help="output CSV path (overrides output_path)")
    parser.add_argument("--tail-tol", type=float, help="photon-tail / <n> drift tolerance")
    parser.add_argument("--nmax-ceiling", type=int, help="largest Fock truncation to try")
    parser.add_argument("--workers", type=int, default=1, help="parallel grid workers")
    parser.add_argument("--oracle-nmax", type=int, help="Fock truncation of the Liouvillian oracle")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ladder-cavity", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="solve a single parameter point")
    _common(sim)
    for name in PARAM_FLAGS:
        sim.add_argument(f"--{name.replace('_', '-')}", type=float, dest=name)
    sim.add_argument("--ratio", type=float, help="set omega2/omega1 at fixed generalized Rabi frequency")

    sw = sub.add_parser("sweep", help="config-driven parameter sweep")
    _common(sw, config_required=True)
    sw.add_argument("--oracle-check", action="store_true", help="add oracle columns per row")

    for name, helptext in (("fig2", "interference-dip preset"), ("fig3", "population-inversion preset")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--write-config", help="write the preset as TOML and exit")
        if name == "fig3":
            p.add_argument("--ratio-range", type=float, nargs=2, metavar=("MIN", "MAX"), default=(0.1, 10.0))
            p.add_argument("--count", type=int, default=101)

    oc = sub.add_parser("oracle-check", help="compare the block solver with the Liouvillian oracle")
    _common(oc, config_required=True)
    oc.add_argument("--threshold", type=float, default=1e-6)
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    if args.tail_tol is not None:
        changes["tail_tol"] = args.tail_tol
    if args.nmax_ceiling is not None:
        changes["nmax_ceiling"] = args.nmax_ceiling
    if args.oracle_nmax is not None:
        changes["oracle_n_max"] = args.oracle_nmax
    if args.out is not None:
        changes["output_path"] = args.out
    if getattr(args, "oracle_check", False):
        changes["oracle_check"] = True
    return replace(cfg, **changes) if changes else cfg


def _run_and_write(cfg: RunConfig, workers: int) -> int:
    rows = run_sweep(cfg, workers=workers)
    path = write_csv(rows, cfg.output_path, with_oracle=cfg.oracle_check)
    failed = [r for r in rows if r.error]
    print(f"wrote {len(rows)} rows to {path}")
    for r in failed:
        print(f"  point {r.sweep_value!r}: {r.error}", file=sys.stderr)
    return EXIT_SOLVER if failed else EXIT_OK


def _simulate(args) -> int:
    base = load_config(args.config).base if args.config else preset_fig2().base
    given = {k: getattr(args, k) for k in PARAM_FLAGS if getattr(args, k) is not None}
    try:
        p = replace(base, **given)
        if args.ratio is not None:
            p = p.with_ratio(args.ratio)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    d = derive_dressed(p)
    kwargs = {}
    if args.tail_tol is not None:
        kwargs["tail_tol"] = args.tail_tol
    if args.nmax_ceiling is not None:
        kwargs["ceiling"] = args.nmax_ceiling
    n_max, rec, residual = solve_projected(p, **kwargs)
    out = {
        "theta": d.theta,
        "g_eff": d.g_eff,
        "n_max_used": n_max,
        "residual": residual,
        "warnings": validity_report(p),
        **rec.as_dict(),
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command in ("fig2", "fig3"):
            if args.command == "fig2":
                cfg = preset_fig2()
            else:
                cfg = preset_fig3(tuple(args.ratio_range), args.count)
            if args.config:
                cfg = load_config(args.config)
            cfg = _apply_overrides(cfg, args)
            if args.write_config:
                with open(args.write_config, "w") as fh:
                    fh.write(dump_config(cfg))
                print(f"wrote {args.write_config}")
                return EXIT_OK
            return _run_and_write(cfg, args.workers)
        cfg = _apply_overrides(load_config(args.config), args)
        if args.command == "sweep":
            return _run_and_write(cfg, args.workers)
        summary = oracle_report(cfg, threshold=args.threshold)
        print(summary.format())
        return EXIT_OK if summary.passed else EXIT_ORACLE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
