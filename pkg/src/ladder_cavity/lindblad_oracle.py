"""Brute-force Liouvillian reference for the secular dressed master equation.

The Hilbert space is ``|dressed level> (x) |Fock n>`` with the dressed order
``(-, 0, +)``; density matrices are column-stacked, so
``vec(A X B) = (B^T kron A) vec(X)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dressed_model import BareParams, DressedParams, dressed_decomposition
from .fock_system import DegenerateSteadyStateError, FockBlockState, NonConvergedError
from .observables import ObservableRecord, g2_from_distribution

MINUS, ZERO, PLUS = 0, 1, 2
DEFAULT_ORACLE_NMAX = 12
# shift just off zero so the factorization never meets an exactly singular L
SHIFT = 1e-9
RESIDUAL_TOL = 1e-10
DEGENERACY_GAP = 1e-8
IMAG_FAIL = 1e-8


@dataclass(frozen=True)
class Superoperator:
    matrix: sp.csr_matrix
    n_max: int
    variant: str  # "effective" or "full"
    delta_c: Optional[float] = None

    @property
    def hilbert_dim(self) -> int:
        return 3 * (self.n_max + 1)


@dataclass(frozen=True)
class DensityMatrix:
    rho: np.ndarray
    n_max: int

    def block(self, i: int, j: int) -> np.ndarray:
        """Field operator ``<i| rho |j>`` for dressed indices ``i, j``."""
        m = self.n_max + 1
        return self.rho[i * m:(i + 1) * m, j * m:(j + 1) * m]


def annihilation(n_max: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1, format="csr")


def _operators(n_max: int):
    m = n_max + 1
    eye_f = sp.identity(m, format="csr")
    a = sp.kron(sp.identity(3), annihilation(n_max), format="csr")

    def R(i, j):
        e = sp.csr_matrix(([1.0], ([i], [j])), shape=(3, 3))
        return sp.kron(e, eye_f, format="csr")

    return a, R


def _dissipator_channels(d: DressedParams, kappa: float, n_max: int):
    """``(prefactor, O)`` pairs; each contributes ``c (2 O r O+ - O+O r - r O+O)``."""
    a, R = _operators(n_max)
    c2, s2 = d.cos2, d.sin2
    r_z = R(PLUS, PLUS) - R(MINUS, MINUS)
    mixed = (d.gamma32 * s2 + d.gamma21 * c2) / 8.0
    return [
        (kappa / 2.0, a),
        (d.gamma32 * c2 / 4.0, R(MINUS, ZERO)),
        (d.gamma32 * c2 / 4.0, R(PLUS, ZERO)),
        (mixed, r_z),
        (mixed, R(PLUS, MINUS)),
        (mixed, R(MINUS, PLUS)),
        (d.gamma21 * s2 / 4.0, R(ZERO, MINUS)),
        (d.gamma21 * s2 / 4.0, R(ZERO, PLUS)),
    ]


def _liouvillian(H: sp.spmatrix, channels) -> sp.csr_matrix:
    dim = H.shape[0]
    eye = sp.identity(dim, format="csr")
    L = -1j * (sp.kron(eye, H) - sp.kron(H.T, eye))
    for c, O in channels:
        if c == 0:
            continue
        OdO = (O.conj().T @ O).tocsr()
        L = L + c * (2.0 * sp.kron(O.conj(), O) - sp.kron(eye, OdO) - sp.kron(OdO.T, eye))
    return sp.csr_matrix(L, dtype=complex)


def dissipator(d: DressedParams, kappa: float, n_max: int) -> sp.csr_matrix:
    """Dissipative part alone, as a superoperator."""
    dim = 3 * (n_max + 1)
    return _liouvillian(sp.csr_matrix((dim, dim), dtype=complex), _dissipator_channels(d, kappa, n_max))


def effective_hamiltonian(d: DressedParams, n_max: int) -> sp.csr_matrix:
    a, R = _operators(n_max)
    ad = a.T.tocsr()
    g = d.g_eff
    return sp.csr_matrix(1j * g * (ad @ R(MINUS, PLUS) - R(PLUS, MINUS) @ a), dtype=complex)


def full_hamiltonian(d: DressedParams, p: BareParams, n_max: int) -> sp.csr_matrix:
    """Dressed-frame Hamiltonian with every coupling term and free evolution."""
    a, R = _operators(n_max)
    ad = a.T.tocsr()
    c, s = math.cos(d.theta), math.sin(d.theta)
    r_z = R(PLUS, PLUS) - R(MINUS, MINUS)
    coupling = (
        0.5j * (p.g1 * c + p.g2 * s) * ad @ r_z
        + 0.5j * (p.g1 * c - p.g2 * s) * ad @ (R(PLUS, MINUS) - R(MINUS, PLUS))
        - (1j / math.sqrt(2.0)) * p.g1 * s * ad @ (R(ZERO, MINUS) + R(ZERO, PLUS))
        - (1j / math.sqrt(2.0)) * p.g2 * c * ad @ (R(MINUS, ZERO) + R(PLUS, ZERO))
    )
    H = p.detuning * (ad @ a) + d.big_omega * r_z + coupling + coupling.conj().T
    return sp.csr_matrix(H, dtype=complex)


def build_effective_liouvillian(d: DressedParams, kappa: float, n_max: int) -> Superoperator:
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    L = _liouvillian(effective_hamiltonian(d, n_max), _dissipator_channels(d, kappa, n_max))
    return Superoperator(L, n_max, "effective", 2.0 * d.big_omega)


def build_full_liouvillian(d: DressedParams, p: BareParams, n_max: int) -> Superoperator:
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    L = _liouvillian(full_hamiltonian(d, p, n_max), _dissipator_channels(d, p.kappa, n_max))
    return Superoperator(L, n_max, "full", p.detuning)


def trace_functional(n_max: int) -> np.ndarray:
    dim = 3 * (n_max + 1)
    return np.eye(dim).reshape(-1, order="F")


def _null_vector(L: Superoperator, method: str) -> np.ndarray:
    if method == "dense":
        _, svals, vh = la.svd(L.matrix.toarray(), lapack_driver="gesdd")
        if svals[-2] < DEGENERACY_GAP:
            raise DegenerateSteadyStateError(
                f"second singular value {svals[-2]:.2e} is within {DEGENERACY_GAP:g} of zero"
            )
        return vh[-1].conj()
    if method == "sparse":
        vals, vecs = spla.eigs(L.matrix.tocsc(), k=2, sigma=SHIFT, which="LM")
        order = np.argsort(np.abs(vals))
        if abs(vals[order[1]]) < DEGENERACY_GAP:
            raise DegenerateSteadyStateError(
                f"second eigenvalue {vals[order[1]]:.2e} is within {DEGENERACY_GAP:g} of zero"
            )
        return vecs[:, order[0]]
    raise ValueError(f"unknown method {method!r}")


def oracle_steady_state(L: Superoperator, method: str = "sparse", tol: float = RESIDUAL_TOL) -> DensityMatrix:
    """Trace-normalized, Hermitized null vector of ``L``.

    ``method="sparse"`` uses shift-invert Arnoldi for the two eigenvalues
    nearest zero; ``"dense"`` takes the smallest right singular vector.
    """
    dim = L.hilbert_dim
    v = _null_vector(L, method)
    rho = v.reshape(dim, dim, order="F")
    # fix the arbitrary eigenvector phase before Hermitizing
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    residual = float(np.linalg.norm(L.matrix @ rho.reshape(-1, order="F")))
    if tol is not None and residual > tol:
        raise NonConvergedError(f"oracle residual {residual:.3e} exceeds {tol:.1e}")
    return DensityMatrix(rho, L.n_max)


def _real_diagonal(op: np.ndarray, what: str) -> np.ndarray:
    diag = np.diag(op)
    worst = float(np.max(np.abs(diag.imag))) if diag.size else 0.0
    if worst > IMAG_FAIL:
        raise ValueError(f"{what} diagonal has imaginary residue {worst:.2e}")
    return diag.real.copy()


def project_to_blocks(rho: DensityMatrix) -> FockBlockState:
    """Fock diagonals of the five dressed combinations used by the block solver."""
    a = annihilation(rho.n_max).toarray()
    ad = a.T
    mm, zz, pp = rho.block(MINUS, MINUS), rho.block(ZERO, ZERO), rho.block(PLUS, PLUS)
    pm, mp = rho.block(PLUS, MINUS), rho.block(MINUS, PLUS)
    ops = {
        "P0": mm + zz + pp,
        "P1": pp + mm,
        "P2": pp - mm,
        "P3": 0.5 * (ad @ pm + mp @ a),
        "P4": 0.5 * (pm @ ad + a @ mp),
    }
    return FockBlockState(*(_real_diagonal(op, name) for name, op in ops.items()))


def bare_observables(rho: DensityMatrix, theta: float) -> ObservableRecord:
    """Observables traced directly from the full density matrix."""
    m = rho.n_max + 1
    upper = dressed_decomposition(theta)[2]
    proj = sp.kron(np.outer(upper, upper), sp.identity(m), format="csr")
    s33 = float(np.real(np.sum(proj.multiply(rho.rho.T))))

    pops = [float(np.trace(rho.block(i, i)).real) for i in (MINUS, ZERO, PLUS)]
    field = _real_diagonal(rho.block(MINUS, MINUS) + rho.block(ZERO, ZERO) + rho.block(PLUS, PLUS), "field")
    n = np.arange(m, dtype=float)
    return ObservableRecord(
        mean_n=float(n @ field),
        g2_zero=g2_from_distribution(field),
        r_plus=pops[PLUS],
        r_minus=pops[MINUS],
        r_zero=pops[ZERO],
        s33=s33,
    )


def min_eigenvalue(rho: DensityMatrix) -> float:
    return float(np.linalg.eigvalsh(rho.rho)[0])
