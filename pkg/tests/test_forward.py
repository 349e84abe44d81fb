import numpy as np
import pytest
from scipy.special import hankel1, jv

from dbar_recon.core import (BoundaryTrace, Circle, DomainError, ExceptionalPointError,
                             phi0)
from dbar_recon.forward import (cauchy_data_volume, dirichlet_solve, dtn_assemble,
                                ls_operator_norm_proxy, psi_trace_from_dtn, single_layer_matrix,
                                smallest_singular_value, solve_mu, solve_psi, solve_psi_plus,
                                volume_potential)
from conftest import bump


def test_zero_potential_gives_plane_waves():
    v = bump(16, amplitude=0.0)
    assert np.all(solve_mu(v, 2.0).values == 1)
    assert np.allclose(solve_psi_plus(v, 2.0).values, phi0(v.grid.nodes, 2.0, 1.0))


def _lap_residual(v, psi):
    h = v.grid.h
    f = psi.values
    lap = (f[2:, 1:-1] + f[:-2, 1:-1] + f[1:-1, 2:] + f[1:-1, :-2] - 4 * f[1:-1, 1:-1]) / h ** 2
    res = lap + (v.E - v.values[1:-1, 1:-1]) * f[1:-1, 1:-1]
    r = np.abs(v.grid.nodes[1:-1, 1:-1])
    return np.max(np.abs(res[r < 1.0]))


@pytest.mark.parametrize("kind", ["faddeev", "plus"])
def test_ls_solution_satisfies_schroedinger_second_order(kind):
    # (Delta + E - v) psi = 0 holds up to the five-point truncation error, O(h^2)
    res = []
    for n in (32, 64):
        v = bump(n, amplitude=0.8)
        lam = 2.0 * np.exp(0.4j)
        psi = solve_psi(v, lam) if kind == "faddeev" else solve_psi_plus(v, lam)
        res.append(_lap_residual(v, psi))
    assert res[1] < 0.02
    assert 3.0 < res[0] / res[1] < 5.5


def test_ls_converges_under_refinement():
    lam = 0.5 * np.exp(2.0j)
    a = solve_mu(bump(32), lam).values
    b = solve_mu(bump(64), lam).values[::2, ::2]
    assert np.max(np.abs(a - b)) < 1e-5


def test_solver_methods_agree_and_picard_contracts():
    v = bump(32, amplitude=0.3)
    lam = 3.0 + 0j
    d = solve_mu(v, lam, method="dense").values
    g = solve_mu(v, lam, method="gmres").values
    p, info = solve_mu(v, lam, method="picard", return_info=True)
    assert np.max(np.abs(d - g)) < 1e-10
    assert np.max(np.abs(d - p.values)) < 1e-10
    assert info.contraction < 1
    assert ls_operator_norm_proxy(v, lam) < 1


def test_picard_divergence_raises():
    v = bump(16, amplitude=-40.0)
    with pytest.raises(ExceptionalPointError):
        solve_mu(v, 1.1, method="picard", tol=1e-10)


def test_sigma_min_positive_for_small_potential():
    v = bump(16, amplitude=0.2)
    assert 0.5 < smallest_singular_value(v, 2.0) <= 1.0 + 1e-12


def test_dtn_free_space_matches_bessel_quotient():
    c = Circle(0j, 1.3, 32)
    L = dtn_assemble(None, 2.0, c).matrix
    k = np.sqrt(2.0)
    for m in range(-6, 7):
        e = np.exp(1j * m * c.angles)
        lam_m = (e.conj() @ L @ e) / c.n
        ref = k * 0.5 * (jv(abs(m) - 1, k * 1.3) - jv(abs(m) + 1, k * 1.3)) / jv(abs(m), k * 1.3)
        assert abs(lam_m - ref) < 1e-9


@pytest.fixture(scope="module")
def dtn_pair():
    v = bump(32, amplitude=0.8)
    c = Circle(0j, 1.8, 32)
    return v, c, dtn_assemble(v, 1.0, c), dtn_assemble(None, 1.0, c)


def test_dtn_is_symmetric(dtn_pair):
    _, _, Lv, _ = dtn_pair
    M = Lv.matrix
    assert np.max(np.abs(M - M.T)) < 1e-10 * np.max(np.abs(M))


def test_dtn_reproduces_volume_cauchy_data(dtn_pair):
    v, c, Lv, _ = dtn_pair
    lam = 2.0 * np.exp(0.3j)
    psi = solve_psi(v, lam)
    cd = cauchy_data_volume(v, lam, psi, c)
    err = np.max(np.abs(Lv.matrix @ cd.trace.values - cd.normal_derivative.values))
    assert err < 1e-4 * np.max(np.abs(cd.normal_derivative.values))


def test_boundary_equation_recovers_trace(dtn_pair):
    v, c, Lv, L0 = dtn_pair
    for lam in (2.0 * np.exp(0.3j), 0.4 * np.exp(-2.0j)):
        tr = psi_trace_from_dtn(Lv, L0, lam, 1.0)
        ref = volume_potential(v, lam, solve_psi(v, lam), c.nodes)
        assert np.max(np.abs(tr.values - ref)) < 1e-4 * np.max(np.abs(ref))


def test_dtn_requires_enclosing_circle():
    with pytest.raises(DomainError):
        dtn_assemble(bump(16), 1.0, Circle(0j, 1.0, 16))


def test_single_layer_outgoing_eigenvalues():
    # int G+(z - z') e^{i m t'} dl' = -(i pi R / 2) J_m(kR) H_m(kR) e^{i m t}
    R, E = 0.9, 1.7
    c = Circle(0j, R, 32)
    S = single_layer_matrix(0j + 1.0 + 1e-9, E, c, kernel="plus")
    k = np.sqrt(E)
    for m in (0, 1, 3, 7):
        e = np.exp(1j * m * c.angles)
        ref = -0.5j * np.pi * R * jv(m, k * R) * hankel1(m, k * R)
        assert np.max(np.abs(S @ e - ref * e)) < 1e-10


def test_dirichlet_free_space_bessel_profile():
    R, E, m = 1.2, 1.0, 2
    c = Circle(0j, R, 32)
    u0 = BoundaryTrace(c, np.exp(1j * m * c.angles))
    v = bump(32, amplitude=0.0)
    u = dirichlet_solve(v, E, u0, grid=v.grid)
    z = v.grid.nodes
    inside = np.abs(z) < R - 0.1
    ref = jv(m, np.abs(z)) / jv(m, R) * np.exp(1j * m * np.angle(z))
    assert np.max(np.abs(u.values - ref)[inside]) < 1e-5
