"""Truncated Fock-block equations for the sideband-resonant dressed atom.

The state is five real vectors ``P^(i)_n`` (``i = 0..4``) over photon
numbers ``n = 0..n_max``:

* ``P0`` -- cavity photon distribution (atom traced out)
* ``P1`` -- weight in the ``|+>`` and ``|->`` dressed states
* ``P2`` -- dressed inversion ``rho_++ - rho_--``
* ``P3``, ``P4`` -- the two symmetrized photon-assisted ``+-`` coherences

Flattened index of ``(block i, Fock n)`` is ``i * (n_max + 1) + n``.
Inflow terms that would reference ``n_max + 1`` are dropped at the boundary.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .dressed_model import DressedParams

log = logging.getLogger(__name__)

N_BLOCKS = 5
RESIDUAL_TOL = 1e-10
DEFAULT_TAIL_TOL = 1e-12
DEFAULT_NMAX_CEILING = 4096
INITIAL_NMAX = 8
# absolute <n> drift treated as round-off (the trace is pinned to 1)
DRIFT_FLOOR = 100 * np.finfo(float).eps
# condition-number estimate above which the pinned system counts as singular
DEGENERACY_COND = 1e13


class SolverError(RuntimeError):
    """Base class for steady-state and propagation failures."""


class DegenerateSteadyStateError(SolverError):
    pass


class NonConvergedError(SolverError):
    pass


class TruncationError(SolverError):
    pass


class StiffnessError(SolverError):
    pass


@dataclass(frozen=True)
class FockBlockState:
    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    p4: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.p0) - 1

    @property
    def blocks(self) -> tuple[np.ndarray, ...]:
        return (self.p0, self.p1, self.p2, self.p3, self.p4)

    def to_vector(self) -> np.ndarray:
        return np.concatenate(self.blocks)

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "FockBlockState":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size % N_BLOCKS or x.size < 2 * N_BLOCKS:
            raise ValueError(f"vector of length {x.size} is not five Fock blocks")
        return cls(*(b.copy() for b in np.split(x, N_BLOCKS)))

    @classmethod
    def product(cls, atom_pops, photon_dist) -> "FockBlockState":
        """Dressed-diagonal atom times Fock-diagonal field.

        ``atom_pops`` are the ``(-, 0, +)`` populations. Dressed coherences
        and bare-state preparations cannot be represented by the five blocks.
        """
        pm, _, pp = (float(v) for v in atom_pops)
        q = np.asarray(photon_dist, dtype=float)
        zero = np.zeros_like(q)
        return cls(q.copy(), (pp + pm) * q, (pp - pm) * q, zero, zero.copy())

    def check_physical(self, tol: float = 1e-9) -> list[str]:
        """Post-solve sanity checks; returns a list of violations."""
        problems = []
        if abs(self.p0.sum() - 1.0) > tol:
            problems.append(f"trace {self.p0.sum():.12g} != 1")
        if np.any(self.p1 < -tol) or np.any(self.p1 > self.p0 + tol):
            problems.append("P1 outside [0, P0]")
        if np.any(np.abs(self.p2) > self.p1 + tol):
            problems.append("|P2| exceeds P1")
        return problems


@dataclass(frozen=True)
class GeneratorMatrix:
    matrix: sp.csr_matrix
    n_max: int
    dressed: DressedParams
    kappa: float

    @property
    def dim(self) -> int:
        return N_BLOCKS * (self.n_max + 1)

    def index(self, block: int, n: int) -> int:
        return block * (self.n_max + 1) + n

    def __matmul__(self, x):
        return self.matrix @ x


def build_generator(d: DressedParams, kappa: float, n_max: int) -> GeneratorMatrix:
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    g = d.g_eff
    m = n_max + 1
    n = np.arange(m, dtype=float)
    up = n[:-1]  # rows that receive inflow from n + 1
    rows, cols, vals = [], [], []

    def add(bi, ni, bj, nj, v):
        ni = np.asarray(ni)
        nj = np.asarray(nj)
        v = np.broadcast_to(np.asarray(v, dtype=float), ni.shape)
        rows.append(bi * m + ni)
        cols.append(bj * m + nj)
        vals.append(v)

    ni = np.arange(m)
    lo = ni[:-1]
    hi = ni[1:]

    # photon-number decay, shared form for P0, P1, P2
    for b, extra in ((0, 0.0), (1, d.alpha / 2), (2, d.beta / 2)):
        add(b, lo, b, hi, kappa * (up + 1))
        add(b, ni, b, ni, -(kappa * n + extra))

    add(0, ni, 4, ni, -2 * g)
    add(0, ni, 3, ni, 2 * g)

    add(1, ni, 4, ni, -2 * g)
    add(1, ni, 3, ni, 2 * g)
    add(1, ni, 0, ni, d.gamma32 * d.cos2)

    add(2, ni, 4, ni, -2 * g)
    add(2, ni, 3, ni, -2 * g)

    # P3_n: g n/2 (P1_{n-1} - P1_n + P2_{n-1} + P2_n)
    add(3, hi, 1, lo, g * n[1:] / 2)
    add(3, ni, 1, ni, -g * n / 2)
    add(3, hi, 2, lo, g * n[1:] / 2)
    add(3, ni, 2, ni, g * n / 2)
    add(3, ni, 4, ni, -kappa)
    add(3, lo, 3, hi, kappa * (up + 1))
    add(3, ni, 3, ni, -(kappa * (n - 0.5) + d.zeta))

    # P4_n: g (n+1)/2 (P2_{n+1} + P2_n - P1_{n+1} + P1_n)
    add(4, lo, 2, hi, g * (up + 1) / 2)
    add(4, ni, 2, ni, g * (n + 1) / 2)
    add(4, lo, 1, hi, -g * (up + 1) / 2)
    add(4, ni, 1, ni, g * (n + 1) / 2)
    add(4, lo, 4, hi, kappa * (up + 1))
    add(4, ni, 4, ni, -(kappa * (n + 0.5) + d.zeta))

    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(N_BLOCKS * m, N_BLOCKS * m),
    ).tocsr()
    mat.eliminate_zeros()
    return GeneratorMatrix(mat, n_max, d, kappa)


def generator_residual(G: GeneratorMatrix, x: FockBlockState) -> float:
    return float(np.linalg.norm(G.matrix @ x.to_vector()))


def _augmented_scale(G: GeneratorMatrix) -> float:
    d = G.dressed
    rates = [G.kappa, d.alpha / 2, d.beta / 2, d.zeta]
    return 0.1 * min(r for r in rates if r > 0)


def _pinned_lstsq(G: GeneratorMatrix) -> np.ndarray:
    """Least-squares solution of ``[G; trace row] x = [0; 1]``.

    Solved through the sparse augmented system ``[[s I, A], [A^T, 0]]`` so the
    conditioning is that of ``A`` rather than ``A^T A``. The scale ``s`` sits
    near the slowest relaxation rate, close to the optimal choice
    ``sigma_min(A) / sqrt(2)``.
    """
    dim = G.dim
    trace_row = sp.csr_matrix(
        (np.ones(G.n_max + 1), (np.zeros(G.n_max + 1, dtype=int), np.arange(G.n_max + 1))),
        shape=(1, dim),
    )
    A = sp.vstack([G.matrix, trace_row]).tocsc()
    rows = A.shape[0]
    K = sp.bmat([[_augmented_scale(G) * sp.identity(rows), A], [A.T, None]], format="csc")
    rhs = np.zeros(rows + dim)
    rhs[rows - 1] = 1.0
    try:
        lu = spla.splu(K)
    except RuntimeError as exc:
        raise DegenerateSteadyStateError(
            f"steady state not unique: pinned generator is exactly singular ({exc})"
        ) from exc

    inv = spla.LinearOperator(K.shape, matvec=lu.solve, rmatvec=lambda v: lu.solve(v, trans="T"))
    cond = spla.onenormest(inv) * spla.onenormest(K)
    if not math.isfinite(cond) or cond > DEGENERACY_COND:
        raise DegenerateSteadyStateError(
            f"steady state not unique: generator rank deficiency exceeds 1 (cond ~ {cond:.2e})"
        )
    sol = lu.solve(rhs)
    return sol[rows:]


def steady_state(G: GeneratorMatrix, tol: float = RESIDUAL_TOL) -> FockBlockState:
    """Normalized steady state of the truncated block equations.

    Raises :class:`NonConvergedError` when ``||G x||`` exceeds ``tol``; pass
    ``tol=None`` to skip the check.
    """
    x = _pinned_lstsq(G)
    x = x / x[: G.n_max + 1].sum()
    residual = float(np.linalg.norm(G.matrix @ x))
    if tol is not None and residual > tol:
        raise NonConvergedError(
            f"steady-state residual {residual:.3e} exceeds {tol:.1e} at n_max={G.n_max}"
        )
    return FockBlockState.from_vector(x)


def evolve(
    G: GeneratorMatrix,
    x0: FockBlockState,
    t_final: float,
    reltol: float = 1e-9,
    atol: float = 1e-13,
    method: str = "BDF",
) -> FockBlockState:
    """Propagate ``dx/dt = G x`` from ``x0`` to ``t_final``."""
    if x0.n_max != G.n_max:
        raise ValueError(f"state n_max {x0.n_max} != generator n_max {G.n_max}")
    if t_final < 0:
        raise ValueError("t_final must be >= 0")
    if t_final == 0:
        return x0
    A = G.matrix.tocsc()
    sol = solve_ivp(
        lambda t, y: A @ y,
        (0.0, t_final),
        x0.to_vector(),
        method=method,
        jac=A,
        rtol=reltol,
        atol=atol,
    )
    if not sol.success:
        raise StiffnessError(
            f"integration stopped at t={sol.t[-1]:.6g} of {t_final:.6g}: {sol.message}"
        )
    return FockBlockState.from_vector(sol.y[:, -1])


def _mean_n(x: FockBlockState) -> float:
    return float(np.dot(np.arange(x.n_max + 1), x.p0))


def auto_truncate(
    d: DressedParams,
    kappa: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
    ceiling: int = DEFAULT_NMAX_CEILING,
    n_start: int = INITIAL_NMAX,
    residual_tol: float = RESIDUAL_TOL,
) -> tuple[int, FockBlockState]:
    """Double ``n_max`` until the photon tail and ``<n>`` have both settled.

    Convergence at ``n`` needs ``P0[n] < tail_tol`` and a relative change of
    ``<n>`` below ``tail_tol`` against the solve at ``n // 2`` (down to a
    round-off floor of ``DRIFT_FLOOR`` absolute).
    """
    if tail_tol <= 0:
        raise ValueError("tail_tol must be > 0")
    if n_start < 2:
        raise ValueError("n_start must be >= 2")

    prev = steady_state(build_generator(d, kappa, n_start // 2), tol=None)
    n = n_start
    while n <= ceiling:
        G = build_generator(d, kappa, n)
        x = steady_state(G, tol=None)
        mean, prev_mean = _mean_n(x), _mean_n(prev)
        drift = abs(mean - prev_mean)
        settled = drift <= tail_tol * abs(mean) + DRIFT_FLOOR
        log.debug("n_max=%d tail=%.3e <n>=%.12g drift=%.3e", n, x.p0[-1], mean, drift)
        if abs(x.p0[-1]) < tail_tol and settled:
            residual = generator_residual(G, x)
            if residual > residual_tol:
                raise NonConvergedError(
                    f"steady-state residual {residual:.3e} exceeds {residual_tol:.1e} at n_max={n}"
                )
            return n, x
        prev = x
        n *= 2
    raise TruncationError(f"truncation not converged below n_max ceiling {ceiling}")
