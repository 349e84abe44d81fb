import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbar_recon.core import DbarError, LambdaGrid, SingularPointError
from dbar_recon.dbar import (DbarInverse, DbarSystem, RingKernel, check_cauchy_pompeiu_assembly,
                             kernel_c, manufacture_forward, ring_cauchy_matrix, theta_integral)
from dbar_recon.greens import faddeev_G, gplus
from dbar_recon.scatdata import ScatteringData
from conftest import bump
from oracles import G_jump_brute, theta_integral_gl

LG = LambdaGrid(1.5, 6.0, 32, 32)


@pytest.mark.parametrize("lam", [1.5 * np.exp(0.7j), np.exp(-2.0j) / 1.5])
@pytest.mark.parametrize("s", [0.3 + 0.2j, 2.0 * np.exp(1.1j), -1.7 + 0.4j, 0.1 - 0.6j])
def test_theta_integral_closed_form(lam, s):
    assert abs(theta_integral(lam, s) - theta_integral_gl(lam, s)) < 1e-10


def test_kernel_singular_points_raise():
    lam = 1.5 * np.exp(0.2j)
    with pytest.raises(SingularPointError):
        kernel_c(lam, lam)
    with pytest.raises(SingularPointError):
        kernel_c(lam, -1 / np.conj(lam))


@pytest.mark.parametrize("i", [0, 11, 32, 53])
@pytest.mark.parametrize("z", [0.4 + 0.2j, -0.7 + 0.5j, 1.2 - 0.9j])
def test_ring_quadrature_reproduces_green_jump(i, z):
    # G(z, lambda) - G+(z) = (2 pi)^-2 int_{dD} c(lambda, s) phi0(z, s) ds
    from dbar_recon.core import phi0
    K = RingKernel.build(LG)
    lam = LG.ring_nodes[i]
    val = K.quad[i] @ phi0(z, LG.ring_nodes, 1.0) / (4 * np.pi ** 2)
    ref = faddeev_G(z, lam, 1.0) - gplus(z, 1.0)
    assert abs(val - ref) < 1e-11


def test_ring_quadrature_matches_brute_force():
    K = RingKernel.build(LG)
    from dbar_recon.core import phi0
    z = 0.5 - 0.3j
    for i in (3, 40):
        lam = LG.ring_nodes[i]
        brute = G_jump_brute(z, lam, 1.0, kernel_c, LG.A, N=40000)
        val = K.quad[i] @ phi0(z, LG.ring_nodes, 1.0) / (4 * np.pi ** 2)
        assert abs(val - brute) < 1e-4


def test_ring_kernel_values_finite_off_singularities():
    K = RingKernel.build(LambdaGrid(1.5, 6.0, 8, 8))
    c = K.values()
    assert np.isnan(c).sum() == 2 * 16
    assert np.all(np.isfinite(c[~np.isnan(c)]))


def _outer_mask(f):
    out = np.zeros(LG.plane_nodes.shape, dtype=complex)
    out[LG.n_radial:] = f[LG.n_radial:]
    return out


def test_solid_cauchy_transform_radial_density():
    # -(1/pi) int_{A<|s|<R} 2|s|^2 / (s - lam) = |lam|^2 conj(lam) - A^4/lam (lam in the annulus), 0 inside
    lam = LG.plane_nodes
    op = DbarInverse(LG)
    out = op(_outer_mask(2 * np.abs(lam) ** 2))
    n = LG.n_radial
    ref_out = np.abs(lam[n:]) ** 2 * np.conj(lam[n:]) - LG.A ** 4 / lam[n:]
    assert np.max(np.abs(out[n:] - ref_out)) < 1e-9 * np.max(np.abs(ref_out))
    assert np.max(np.abs(out[:n])) < 1e-9


def test_solid_cauchy_transform_angular_density():
    # dbar(conj(s) s^3) = s^3: transform of s^3 on the outer annulus is
    # |lam|^2 lam^2 - R^2 lam^2 there and -(R^2 - A^2) lam^2 inside |lam| < A
    lam = LG.plane_nodes
    A, R = LG.A, LG.R_max
    op = DbarInverse(LG, extra_radii=[3.0])
    f = _outer_mask(lam ** 3)
    plane, ring = op(f, LG.circles[0].angles)
    n = LG.n_radial
    ref = np.where(np.abs(lam) > 1, np.abs(lam) ** 2 * lam ** 2 - R ** 2 * lam ** 2,
                   -(R ** 2 - A ** 2) * lam ** 2)
    scale = np.max(np.abs(ref))
    assert np.max(np.abs(plane - ref)) < 1e-9 * scale
    rn = LG.ring_nodes
    ring_ref = np.where(np.abs(rn) > 1, A ** 2 * rn ** 2 - R ** 2 * rn ** 2, -(R ** 2 - A ** 2) * rn ** 2)
    assert np.max(np.abs(ring - ring_ref)) < 1e-9 * scale
    p = 3.0 * np.exp(0.4j)
    assert abs(op.at_points(f, [p])[0] - (9 - R ** 2) * p ** 2) < 1e-9 * scale


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_solid_cauchy_transform_is_linear(seed):
    rng = np.random.default_rng(seed)
    op = DbarInverse(LambdaGrid(1.5, 3.0, 8, 8))
    shape = op.lgrid.plane_nodes.shape
    f = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    g = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    a = complex(rng.normal(), rng.normal())
    assert np.allclose(op(a * f + g), a * op(f) + op(g), atol=1e-10)


def test_ring_cauchy_integral_of_analytic_functions():
    targets = np.concatenate([LG.plane_nodes.ravel(), LG.ring_nodes, [1.1j, -0.9 + 0.2j]])
    C = ring_cauchy_matrix(LG, targets)
    s = LG.ring_nodes
    inD = (np.abs(targets) < LG.A + 1e-12) & (np.abs(targets) > 1 / LG.A - 1e-12)
    for F in (lambda x: x ** 2, lambda x: 1 / x):
        out = C @ F(s)
        ref = np.where(inD, F(targets), 0)
        assert np.max(np.abs(out - ref)) < 1e-12 * max(1.0, np.max(np.abs(ref)))


def _zero_data(lg):
    n = lg.ring_nodes.size
    return ScatteringData(lg, 1.0, np.zeros((n, n), dtype=complex),
                          np.zeros(lg.plane_nodes.shape, dtype=complex))


def test_zero_data_gives_unit_solution():
    S = DbarSystem(_zero_data(LG), extra_radii=[4.5])
    sol = S.solve(0.3 + 0.1j)
    assert np.all(sol.plane == 1) and np.all(sol.ring == 1)
    assert S.a1(sol) == 0
    assert np.all(S.evaluate(sol, [4.5j]) == 1)


@pytest.fixture(scope="module")
def forward_case():
    v = bump(16, amplitude=0.5)
    lg = LambdaGrid(1.5, 12.0, 16, 16)
    data, zs, plane, rin, rout = manufacture_forward(v, lg, [0.0, 0.5 + 0.25j, -0.5 - 0.75j])
    return v, lg, data, zs, plane, rin, rout


def test_forward_data_satisfy_integral_equation(forward_case):
    _, _, data, zs, plane, rin, _ = forward_case
    S = DbarSystem(data)
    for k, z in enumerate(zs):
        a, b = S.residual(z, plane[k], rin[k])
        assert max(np.max(np.abs(a)), np.max(np.abs(b))) < 1e-3
        # the other sign convention is an order of magnitude worse
        a2, b2 = S.residual(z, plane[k], rin[k], sign="printed")
        assert max(np.max(np.abs(a2)), np.max(np.abs(b2))) > 10 * max(np.max(np.abs(a)), np.max(np.abs(b)))


def test_solution_matches_forward_mu(forward_case):
    _, _, data, zs, plane, rin, _ = forward_case
    S = DbarSystem(data)
    for k, z in enumerate(zs):
        sol = S.solve(z)
        assert sol.info["residual"] < 1e-10
        assert np.max(np.abs(sol.plane - plane[k])) < 1e-3
        assert np.max(np.abs(sol.ring - rin[k])) < 1e-3


def test_cauchy_pompeiu_assembly(forward_case):
    _, _, data, zs, plane, rin, rout = forward_case
    S = DbarSystem(data)
    assert check_cauchy_pompeiu_assembly(S, zs[1], plane[1], rin[1], rout[1]) < 1e-3


def test_evaluate_reproduces_solution_at_nodes(forward_case):
    _, lg, data, zs, _, _, _ = forward_case
    r, _ = lg.radii
    k = lg.n_radial + 3
    S = DbarSystem(data, extra_radii=[r[k]])
    sol = S.solve(zs[1])
    lam = lg.plane_nodes[k, 5]
    assert abs(S.evaluate(sol, [lam])[0] - sol.plane[k, 5]) < 1e-10


def test_solve_reports_failure():
    lg = LambdaGrid(1.5, 3.0, 8, 8)
    d = _zero_data(lg)
    d.r_plane[:] = 1e3
    S = DbarSystem(d)
    with pytest.raises(DbarError):
        S.solve(0.2, maxiter=2)
