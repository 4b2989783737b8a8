import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ladder_cavity.dressed_model import BareParams, DressedParams, derive_dressed, dressed_rates
from ladder_cavity.fock_system import auto_truncate, DegenerateSteadyStateError
from ladder_cavity.lindblad_oracle import (
    DensityMatrix,
    bare_observables,
    build_effective_liouvillian,
    build_full_liouvillian,
    dissipator,
    effective_hamiltonian,
    full_hamiltonian,
    min_eigenvalue,
    oracle_steady_state,
    project_to_blocks,
    trace_functional,
)
from ladder_cavity.observables import observe


def dressed(theta, g, gamma32=1.0, gamma21=1.0, big_omega=50.0):
    alpha, beta, zeta = dressed_rates(theta, gamma32, gamma21)
    return DressedParams(theta, big_omega, g, alpha, beta, zeta, gamma32, gamma21)


def ket(level, n, n_max):
    v = np.zeros(3 * (n_max + 1))
    v[level * (n_max + 1) + n] = 1.0
    return v


def brute_force_dissipator(d, kappa, n_max):
    """Apply every damping channel to each matrix unit and vectorize by columns."""
    m = n_max + 1
    a_f = np.diag(np.sqrt(np.arange(1, m)), 1)
    a = np.kron(np.eye(3), a_f)

    def R(i, j):
        e = np.zeros((3, 3))
        e[i, j] = 1.0
        return np.kron(e, np.eye(m))

    c2, s2 = math.cos(d.theta) ** 2, math.sin(d.theta) ** 2
    rz = R(2, 2) - R(0, 0)
    mixed = (d.gamma32 * s2 + d.gamma21 * c2) / 8
    channels = [
        (kappa / 2, a),
        (d.gamma32 * c2 / 4, R(0, 1)), (d.gamma32 * c2 / 4, R(2, 1)),
        (mixed, rz), (mixed, R(2, 0)), (mixed, R(0, 2)),
        (d.gamma21 * s2 / 4, R(1, 0)), (d.gamma21 * s2 / 4, R(1, 2)),
    ]
    dim = 3 * m
    S = np.zeros((dim * dim, dim * dim))
    for col in range(dim * dim):
        E = np.zeros((dim, dim))
        E[col % dim, col // dim] = 1.0
        out = np.zeros((dim, dim))
        for c, O in channels:
            out += c * (2 * O @ E @ O.T - O.T @ O @ E - E @ O.T @ O)
        S[:, col] = out.reshape(-1, order="F")
    return S


def test_dissipator_matches_brute_force():
    d = dressed(math.pi / 4, 0.2, gamma32=0.7, gamma21=1.3)
    got = dissipator(d, 0.4, 2).toarray()
    assert got.shape == (81, 81)
    np.testing.assert_allclose(got, brute_force_dissipator(d, 0.4, 2), atol=1e-15)


def test_effective_hamiltonian_zero_coupling():
    assert effective_hamiltonian(dressed(0.3, 0.0), 4).count_nonzero() == 0
    L = build_effective_liouvillian(dressed(0.3, 0.0), 0.5, 4)
    np.testing.assert_allclose(L.matrix.toarray(), dissipator(dressed(0.3, 0.0), 0.5, 4).toarray(), atol=0)


def test_effective_hamiltonian_matrix_elements():
    n_max = 3
    H = effective_hamiltonian(dressed(0.3, 0.25), n_max).toarray()
    # i g a+ R_-+ : |+, n> -> |-, n+1> with amplitude i g sqrt(n+1)
    for n in range(n_max):
        amp = ket(0, n + 1, n_max) @ H @ ket(2, n, n_max)
        assert amp == pytest.approx(1j * 0.25 * math.sqrt(n + 1))
    np.testing.assert_allclose(H, H.conj().T, atol=0)


@settings(max_examples=15, deadline=None)
@given(st.floats(0, math.pi / 2), st.floats(-2, 2), st.floats(0, 3), st.floats(0, 3), st.floats(0.01, 3))
def test_effective_trace_preserving(theta, g, g32, g21, kappa):
    L = build_effective_liouvillian(dressed(theta, g, g32, g21), kappa, 3)
    assert np.max(np.abs(trace_functional(3) @ L.matrix)) < 1e-12


@settings(max_examples=10, deadline=None)
@given(st.floats(0, 1.5), st.floats(0, 1.5), st.floats(1.0, 50.0), st.floats(-3, 3))
def test_full_trace_preserving(g1, g2, om, delta):
    p = BareParams(1.0, 0.5, 0.3, g1, g2, om, 0.7 * om, delta_c=delta * om)
    L = build_full_liouvillian(derive_dressed(p), p, 3)
    assert np.max(np.abs(trace_functional(3) @ L.matrix)) < 1e-12


def test_spectrum_is_dissipative():
    rng = np.random.default_rng(7)
    for _ in range(3):
        p = BareParams(*rng.uniform(0.1, 2, 3), *rng.uniform(0, 2, 2), *rng.uniform(1, 10, 2),
                       delta_c=rng.uniform(-20, 20))
        L = build_full_liouvillian(derive_dressed(p), p, 2)
        assert np.linalg.eigvals(L.matrix.toarray()).real.max() <= 1e-12


def test_full_hamiltonian_free_part():
    p = BareParams(1.0, 1.0, 0.5, 0.0, 0.0, 30.0, 40.0, delta_c=17.0)
    n_max = 3
    H = full_hamiltonian(derive_dressed(p), p, n_max).toarray()
    energies = [17.0 * n + 50.0 * s for s in (-1, 0, 1) for n in range(n_max + 1)]
    np.testing.assert_allclose(H, np.diag(energies), atol=1e-13)


def test_full_hamiltonian_single_transition_limit():
    p = BareParams(1.0, 1.0, 0.5, 2.0, 0.0, 30.0, 0.0, delta_c=0.0)
    d = derive_dressed(p)
    n_max = 2
    H = full_hamiltonian(d, p, n_max).toarray()
    H -= 30.0 * np.diag([s for s in (-1, 0, 1) for _ in range(n_max + 1)])
    # surviving couplings: (i/2) g1 a+ R_z and (i/2) g1 a+ (R_+- - R_-+), plus h.c.
    for level, sign in ((0, -1), (2, 1)):
        assert ket(level, 1, n_max) @ H @ ket(level, 0, n_max) == pytest.approx(0.5j * 2.0 * sign)
    assert ket(2, 1, n_max) @ H @ ket(0, 0, n_max) == pytest.approx(0.5j * 2.0)
    assert ket(0, 1, n_max) @ H @ ket(2, 0, n_max) == pytest.approx(-0.5j * 2.0)
    # nothing touches the |0> dressed state
    zero_rows = [ket(1, n, n_max) for n in range(n_max + 1)]
    for v in zero_rows:
        np.testing.assert_allclose(H @ v, 0, atol=1e-15)
    np.testing.assert_allclose(H, H.conj().T, atol=1e-15)


def test_full_hamiltonian_hermitian():
    p = BareParams(1.0, 1.0, 0.5, 1.3, 0.4, 30.0, 20.0, delta_c=5.0)
    H = full_hamiltonian(derive_dressed(p), p, 4)
    assert abs(H - H.conj().T).max() < 1e-15


def test_rejects_tiny_truncation():
    with pytest.raises(ValueError):
        build_effective_liouvillian(dressed(0.3, 0.1), 1.0, 0)
    p = BareParams(1, 1, 1, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        build_full_liouvillian(derive_dressed(p), p, 0)


def test_zero_coupling_oracle_is_vacuum():
    d = dressed(0.6, 0.0)
    rho = oracle_steady_state(build_effective_liouvillian(d, 0.5, 5))
    field = np.real(np.diag(rho.block(0, 0) + rho.block(1, 1) + rho.block(2, 2)))
    np.testing.assert_allclose(field, np.eye(6)[0], atol=1e-12)
    # no weight anywhere outside |n = 0>
    mask = np.tile(np.eye(6)[0].astype(bool), 3)
    assert np.max(np.abs(rho.rho[~mask][:, ~mask])) < 1e-12


def test_dense_and_sparse_null_vectors_agree(moderate):
    L = build_effective_liouvillian(derive_dressed(moderate), moderate.kappa, 6)
    a = oracle_steady_state(L, method="sparse").rho
    b = oracle_steady_state(L, method="dense").rho
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_oracle_state_valid(moderate):
    d = derive_dressed(moderate)
    rho = oracle_steady_state(build_effective_liouvillian(d, moderate.kappa, 12))
    assert np.allclose(rho.rho, rho.rho.conj().T, atol=1e-12)
    assert np.trace(rho.rho).real == pytest.approx(1.0, abs=1e-10)
    assert min_eigenvalue(rho) >= -1e-9


def test_oracle_degenerate_without_decay():
    d = dressed(0.5, 0.0, gamma32=0.0, gamma21=0.0)
    L = build_effective_liouvillian(d, 0.5, 3)
    with pytest.raises(DegenerateSteadyStateError):
        oracle_steady_state(L, method="dense")


def test_fig2_dip_oracle_empty(fig2_base):
    p = fig2_base.with_ratio(5.001 / 5)
    d = derive_dressed(p)
    rho = oracle_steady_state(build_effective_liouvillian(d, p.kappa, 8))
    assert bare_observables(rho, d.theta).mean_n < 1e-6


def test_projection_of_lower_dressed_vacuum():
    n_max = 3
    v = ket(0, 0, n_max)
    x = project_to_blocks(DensityMatrix(np.outer(v, v).astype(complex), n_max))
    e0 = np.eye(n_max + 1)[0]
    np.testing.assert_array_equal(x.p0, e0)
    np.testing.assert_array_equal(x.p1, e0)
    np.testing.assert_array_equal(x.p2, -e0)
    np.testing.assert_array_equal(x.p3, 0)
    np.testing.assert_array_equal(x.p4, 0)


def test_projection_of_middle_state():
    n_max = 3
    rng = np.random.default_rng(3)
    field = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    field = field @ field.conj().T
    atom = np.zeros((3, 3))
    atom[1, 1] = 1.0
    x = project_to_blocks(DensityMatrix(np.kron(atom, field / np.trace(field)), n_max))
    np.testing.assert_array_equal(x.p1, 0)
    np.testing.assert_array_equal(x.p2, 0)


def test_projection_rejects_bad_imaginary_part():
    n_max = 2
    rho = np.eye(9, dtype=complex) / 9
    rho[0, 0] += 1e-6j
    with pytest.raises(ValueError):
        project_to_blocks(DensityMatrix(rho, n_max))


def test_projection_matches_block_solver(moderate):
    d = derive_dressed(moderate)
    n, x = auto_truncate(d, moderate.kappa)
    y = project_to_blocks(oracle_steady_state(build_effective_liouvillian(d, moderate.kappa, 12)))
    for a, b in zip(x.blocks, y.blocks):
        np.testing.assert_allclose(a[:13], b, atol=1e-8)


@pytest.mark.parametrize("theta", [0.2, 0.9, 1.4])
def test_bare_population_of_dressed_states(theta):
    n_max = 2
    for level, expected in ((1, math.cos(theta) ** 2), (0, math.sin(theta) ** 2 / 2), (2, math.sin(theta) ** 2 / 2)):
        v = ket(level, 1, n_max)
        rec = bare_observables(DensityMatrix(np.outer(v, v).astype(complex), n_max), theta)
        assert rec.s33 == pytest.approx(expected, abs=1e-15)
        assert rec.mean_n == 1.0


def test_bare_population_matches_closed_form_on_fig3_points():
    base = BareParams(1e-2, 1.0, 1e-3, 0.0, 5.0, 400.0, 300.0)
    for ratio in (0.2, 0.5, 2.0):
        p = base.with_ratio(ratio)
        d = derive_dressed(p)
        _, x = auto_truncate(d, p.kappa)
        rho = oracle_steady_state(build_effective_liouvillian(d, p.kappa, 12))
        assert bare_observables(rho, d.theta).s33 == pytest.approx(observe(d.theta, project_to_blocks(rho)).s33, abs=1e-12)
        assert bare_observables(rho, d.theta).s33 == pytest.approx(observe(d.theta, x).s33, abs=1e-6)


def test_full_model_approaches_effective_model():
    gaps = []
    for big in (50.0, 200.0):
        p = BareParams(1.0, 1.0, 1.0, 1.0, 0.5, big / math.sqrt(2), big / math.sqrt(2))
        d = derive_dressed(p)
        full = bare_observables(oracle_steady_state(build_full_liouvillian(d, p, 12)), d.theta).mean_n
        eff = bare_observables(oracle_steady_state(build_effective_liouvillian(d, p.kappa, 12)), d.theta).mean_n
        gaps.append(abs(full / eff - 1))
    # rotating-wave corrections scale as (g / Omega)^2
    assert gaps[0] < 2e-2
    assert gaps[1] < gaps[0] / 10


def test_lower_sideband_also_dark():
    # exploratory: the mirror sideband -2 Omega shows the same suppression
    p = BareParams(1.0, 1.0, 1.0, 1.0, 1.0, 50 / math.sqrt(2), 50 / math.sqrt(2))
    d = derive_dressed(p)
    n = {}
    for k in (-2, 0, 2):
        q = replace(p, delta_c=k * d.big_omega)
        n[k] = bare_observables(oracle_steady_state(build_full_liouvillian(d, q, 12)), d.theta).mean_n
    assert n[-2] == pytest.approx(n[2], rel=1e-6)
    assert n[-2] * 10 < n[0]
