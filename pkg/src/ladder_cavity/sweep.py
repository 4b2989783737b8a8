"""Run configuration, parameter sweeps, figure presets and oracle cross-checks."""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import tomli
import tomli_w

from . import lindblad_oracle as oracle
from .dressed_model import BareParams, derive_dressed, validity_report
from .fock_system import (
    DEFAULT_NMAX_CEILING,
    DEFAULT_TAIL_TOL,
    SolverError,
    auto_truncate,
    build_generator,
    generator_residual,
)
from .observables import ObservableRecord, observe

log = logging.getLogger(__name__)

SWEEP_VARIABLES = ("ratio_omega2_omega1", "delta_c_over_omega", "kappa")
CSV_HEADER = (
    "sweep_value", "theta", "g_eff", "n_max_used", "mean_n", "g2_zero",
    "r_plus", "r_minus", "r_zero", "s33", "residual", "warnings_count",
)
ORACLE_COLUMNS = ("oracle_mean_n", "oracle_discrepancy")
NA = "NA"

# oracle agreement: relative above ABS_REGIME, absolute below it
REL_TOL = 1e-6
ABS_TOL = 1e-9
ABS_REGIME = 1e-6
ORACLE_MAX_MEAN_N = 2.0
OBSERVABLES = ("mean_n", "g2_zero", "r_plus", "r_minus", "r_zero", "s33")


class ConfigError(ValueError):
    pass


class OracleRangeError(ConfigError):
    """Pre-scan found a grid point where the oracle truncation is unreliable."""


@dataclass(frozen=True)
class SweepGrid:
    start: Optional[float] = None
    stop: Optional[float] = None
    count: Optional[int] = None
    spacing: str = "linear"
    values: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.values is not None:
            if len(self.values) < 1:
                raise ConfigError("explicit grid needs at least one value")
            return
        if self.start is None or self.stop is None or self.count is None:
            raise ConfigError("range grid needs start, stop and count")
        if self.count < 1:
            raise ConfigError("grid count must be >= 1")
        if self.count > 1 and not self.start < self.stop:
            raise ConfigError("grid start must be < stop")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"unknown spacing {self.spacing!r}")
        if self.spacing == "log" and self.start <= 0:
            raise ConfigError("log spacing needs start > 0")

    def points(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        if self.count == 1:
            return np.array([float(self.start)])
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RunConfig:
    base: BareParams
    sweep_variable: str
    sweep_grid: SweepGrid
    tail_tol: float = DEFAULT_TAIL_TOL
    nmax_ceiling: int = DEFAULT_NMAX_CEILING
    oracle_check: bool = False
    oracle_n_max: int = oracle.DEFAULT_ORACLE_NMAX
    output_path: str = "sweep.csv"
    reference_rate: str = "gamma"

    def __post_init__(self):
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ConfigError(
                f"sweep_variable must be one of {SWEEP_VARIABLES}, got {self.sweep_variable!r}"
            )
        if not self.tail_tol > 0:
            raise ConfigError("tail_tol must be > 0")
        if self.nmax_ceiling < 8:
            raise ConfigError("nmax_ceiling must be >= 8")
        if self.oracle_n_max < 1:
            raise ConfigError("oracle_n_max must be >= 1")
        if self.sweep_variable == "kappa" and np.any(self.sweep_grid.points() <= 0):
            raise ConfigError("kappa grid values must be > 0")
        if self.sweep_variable == "ratio_omega2_omega1" and np.any(self.sweep_grid.points() < 0):
            raise ConfigError("ratio grid values must be >= 0")


@dataclass
class SweepRow:
    sweep_value: float
    theta: float = math.nan
    g_eff: float = math.nan
    n_max_used: Optional[int] = None
    mean_n: Optional[float] = None
    g2_zero: Optional[float] = None
    r_plus: Optional[float] = None
    r_minus: Optional[float] = None
    r_zero: Optional[float] = None
    s33: Optional[float] = None
    residual: Optional[float] = None
    warnings_count: int = 0
    oracle_mean_n: Optional[float] = None
    oracle_discrepancy: Optional[float] = None
    error: Optional[str] = None

    def record(self) -> ObservableRecord:
        return ObservableRecord(*(getattr(self, k) for k in OBSERVABLES))


def point_params(base: BareParams, variable: str, value: float) -> BareParams:
    if variable == "ratio_omega2_omega1":
        return base.with_ratio(value)
    if variable == "delta_c_over_omega":
        return replace(base, delta_c=value * base.big_omega)
    if variable == "kappa":
        return replace(base, kappa=value)
    raise ConfigError(f"unknown sweep variable {variable!r}")


def solve_projected(p: BareParams, tail_tol=DEFAULT_TAIL_TOL, ceiling=DEFAULT_NMAX_CEILING):
    """``(n_max, record, residual)`` from the Fock-block solver."""
    d = derive_dressed(p)
    n_max, x = auto_truncate(d, p.kappa, tail_tol=tail_tol, ceiling=ceiling)
    residual = generator_residual(build_generator(d, p.kappa, n_max), x)
    return n_max, observe(d.theta, x), residual


def oracle_point(p: BareParams, n_max: int, full: bool = False):
    """``(record, residual)`` from the Liouvillian oracle at fixed truncation."""
    d = derive_dressed(p)
    if full:
        L = oracle.build_full_liouvillian(d, p, n_max)
    else:
        L = oracle.build_effective_liouvillian(d, p.kappa, n_max)
    rho = oracle.oracle_steady_state(L)
    residual = float(np.linalg.norm(L.matrix @ rho.rho.reshape(-1, order="F")))
    return oracle.bare_observables(rho, d.theta), residual


def scaled_discrepancy(value: Optional[float], reference: Optional[float]) -> float:
    """Discrepancy on the relative scale; absolute errors are mapped so that
    ``ABS_TOL`` below ``ABS_REGIME`` lands exactly on ``REL_TOL``."""
    if value is None or reference is None:
        return 0.0 if value is None and reference is None else math.inf
    diff = abs(value - reference)
    if abs(reference) >= ABS_REGIME:
        return diff / abs(reference)
    return diff * (REL_TOL / ABS_TOL)


def _solve_row(cfg: RunConfig, value: float) -> SweepRow:
    row = SweepRow(sweep_value=float(value))
    try:
        p = point_params(cfg.base, cfg.sweep_variable, float(value))
        d = derive_dressed(p)
        row.theta, row.g_eff = d.theta, d.g_eff
        row.warnings_count = len(validity_report(p))
        if cfg.sweep_variable == "delta_c_over_omega":
            # the block equations hold only on the 2*Omega sideband
            rec, residual = oracle_point(p, cfg.oracle_n_max, full=True)
            n_max = cfg.oracle_n_max
        else:
            n_max, rec, residual = solve_projected(p, cfg.tail_tol, cfg.nmax_ceiling)
        row.n_max_used, row.residual = n_max, residual
        for k in OBSERVABLES:
            setattr(row, k, getattr(rec, k))
        if cfg.oracle_check and cfg.sweep_variable != "delta_c_over_omega":
            ref, _ = oracle_point(p, cfg.oracle_n_max)
            row.oracle_mean_n = ref.mean_n
            row.oracle_discrepancy = max(
                scaled_discrepancy(getattr(rec, k), getattr(ref, k)) for k in OBSERVABLES
            )
    except (SolverError, ValueError, ArithmeticError) as exc:
        log.warning("sweep point %r failed: %s", value, exc)
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(cfg: RunConfig, workers: int = 1) -> list[SweepRow]:
    values = cfg.sweep_grid.points()
    if workers <= 1 or len(values) == 1:
        return [_solve_row(cfg, v) for v in values]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order, so row order is the grid order
        return list(pool.map(_solve_row, [cfg] * len(values), values))


def _fmt(value) -> str:
    if value is None:
        return NA
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    return NA if not math.isfinite(value) else repr(value)


def rows_to_csv(rows: Sequence[SweepRow], with_oracle: bool = False) -> str:
    header = CSV_HEADER + (ORACLE_COLUMNS if with_oracle else ())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(getattr(row, k)) for k in header])
    return buf.getvalue()


def write_csv(rows: Sequence[SweepRow], path, with_oracle: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rows_to_csv(rows, with_oracle))
    return path


# -- presets -----------------------------------------------------------------

PRESET_BIG_OMEGA = 500.0


def _on_circle(gamma32, gamma21, kappa, g1, g2, big_omega=PRESET_BIG_OMEGA) -> BareParams:
    w = big_omega / math.sqrt(2.0)
    return BareParams(gamma32=gamma32, gamma21=gamma21, kappa=kappa, g1=g1, g2=g2, omega1=w, omega2=w)


def preset_fig2() -> RunConfig:
    """Interference dip: equal decay rates, g1 slightly above g2, good cavity."""
    return RunConfig(
        base=_on_circle(gamma32=1.0, gamma21=1.0, kappa=1e-3, g1=5.001, g2=5.0),
        sweep_variable="ratio_omega2_omega1",
        sweep_grid=SweepGrid(start=0.98, stop=1.02, count=201),
        output_path="fig2.csv",
        reference_rate="gamma",
    )


def preset_fig3(ratio_range: tuple[float, float] = (0.1, 10.0), count: int = 101) -> RunConfig:
    """Upper-state inversion: weak upper decay, cavity on the upper transition only."""
    return RunConfig(
        base=_on_circle(gamma32=1e-2, gamma21=1.0, kappa=1e-3, g1=0.0, g2=5.0),
        sweep_variable="ratio_omega2_omega1",
        sweep_grid=SweepGrid(start=ratio_range[0], stop=ratio_range[1], count=count, spacing="log"),
        output_path="fig3.csv",
        reference_rate="gamma21",
    )


# -- TOML config -------------------------------------------------------------

def config_to_dict(cfg: RunConfig) -> dict:
    base = {k: v for k, v in asdict(cfg.base).items() if v is not None}
    grid = {k: v for k, v in asdict(cfg.sweep_grid).items() if v is not None}
    if "values" in grid:
        grid["values"] = list(grid["values"])
        grid.pop("spacing", None)
    top = {f.name: getattr(cfg, f.name) for f in fields(cfg) if f.name not in ("base", "sweep_grid")}
    return {**top, "base": base, "sweep_grid": grid}


def dump_config(cfg: RunConfig) -> str:
    return tomli_w.dumps(config_to_dict(cfg))


def config_from_dict(data: dict) -> RunConfig:
    data = dict(data)
    try:
        base = BareParams(**data.pop("base"))
        grid = dict(data.pop("sweep_grid"))
        if "values" in grid:
            grid["values"] = tuple(float(v) for v in grid["values"])
        cfg = RunConfig(base=base, sweep_grid=SweepGrid(**grid), **data)
    except KeyError as exc:
        raise ConfigError(f"missing config section {exc}") from exc
    except TypeError as exc:
        raise ConfigError(f"bad config keys: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except (OSError, tomli.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data)


# -- oracle cross-check ------------------------------------------------------

@dataclass
class OracleSummary:
    threshold: float
    n_points: int
    max_discrepancy: dict = field(default_factory=dict)
    mean_discrepancy: dict = field(default_factory=dict)

    @property
    def worst(self) -> float:
        return max(self.max_discrepancy.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst <= self.threshold

    def format(self) -> str:
        lines = [f"oracle check over {self.n_points} points (threshold {self.threshold:g})"]
        for k in OBSERVABLES:
            lines.append(
                f"  {k:<8} max {self.max_discrepancy[k]:.3e}  mean {self.mean_discrepancy[k]:.3e}"
            )
        lines.append("PASS" if self.passed else "FAIL: discrepancy above threshold")
        return "\n".join(lines)


def oracle_report(cfg: RunConfig, threshold: float = REL_TOL) -> OracleSummary:
    """Compare every grid point of ``cfg`` against the effective-Liouvillian oracle."""
    if cfg.sweep_variable == "delta_c_over_omega":
        raise ConfigError("oracle check compares the sideband-resonant models; detuning sweeps are oracle-only")
    points = [point_params(cfg.base, cfg.sweep_variable, v) for v in cfg.sweep_grid.points()]

    projected = []
    for p in points:
        _, rec, _ = solve_projected(p, cfg.tail_tol, cfg.nmax_ceiling)
        if rec.mean_n > ORACLE_MAX_MEAN_N:
            raise OracleRangeError(
                f"<n> = {rec.mean_n:.3g} > {ORACLE_MAX_MEAN_N} at a grid point; "
                f"oracle truncation at n_max={cfg.oracle_n_max} is unreliable"
            )
        projected.append(rec)

    per_obs = {k: [] for k in OBSERVABLES}
    for p, rec in zip(points, projected):
        ref, _ = oracle_point(p, cfg.oracle_n_max)
        for k in OBSERVABLES:
            per_obs[k].append(scaled_discrepancy(getattr(rec, k), getattr(ref, k)))
    return OracleSummary(
        threshold=threshold,
        n_points=len(points),
        max_discrepancy={k: float(np.max(v)) for k, v in per_obs.items()},
        mean_discrepancy={k: float(np.mean(v)) for k, v in per_obs.items()},
    )
