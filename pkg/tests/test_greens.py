import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbar_recon.core import DomainError, SingularPointError
from dbar_recon.greens import (build_faddeev_table, check_dbar_identity, envelope, faddeev_G,
                               faddeev_G_regular, faddeev_g, gplus, gplus_regular, k_of_lambda,
                               lambda_of_k, symbol_P, symbol_zeros)
from dbar_recon.core import SpatialGrid
from oracles import faddeev_G_integral, g_fourier

CASES = [(0.5 + 0j, 3.0 + 0j, 1.0), (0.3 + 0.4j, 2.5 * np.exp(0.7j), 1.0),
         (1 + 0.2j, 0.3 * np.exp(-1.1j), 2.0), (0.7 - 0.5j, 1.3 * np.exp(2j), 1.0),
         (0.2j, 0.8 + 0j, 1.0), (-1.5 + 0.1j, 6.0 * np.exp(-2.5j), 0.5)]


@pytest.mark.parametrize("z,lam,E", CASES)
def test_g_matches_fourier_integral(z, lam, E):
    assert abs(faddeev_g(z, lam, E) - g_fourier(z, lam, E)) < 1e-7


@pytest.mark.parametrize("z,lam,E", CASES)
def test_G_matches_integral_representation(z, lam, E):
    ref = faddeev_G_integral(z, lam, E)
    assert abs(faddeev_G(z, lam, E) - ref) < 1e-10


def test_G_is_real_and_gradient_consistent():
    z = np.array([0.3 + 0.2j, -1.0 + 0.7j, 2.5 - 0.1j])
    lam = np.array([2.0 * np.exp(0.4j), 0.4 * np.exp(1j), 5.0 + 0j])
    G, gx, gy = faddeev_G(z, lam, 1.3, grad=True)
    assert G.dtype.kind == "f"
    h = 1e-5
    fx = (faddeev_G(z + h, lam, 1.3) - faddeev_G(z - h, lam, 1.3)) / (2 * h)
    fy = (faddeev_G(z + 1j * h, lam, 1.3) - faddeev_G(z - 1j * h, lam, 1.3)) / (2 * h)
    assert np.max(np.abs(fx - gx)) < 1e-7
    assert np.max(np.abs(fy - gy)) < 1e-7


def test_regular_parts():
    for lam in (2.0, 0.3 * np.exp(1j), 7.0j):
        z = 1e-7
        val = faddeev_G(z, lam, 1.5) - np.log(z) / (2 * np.pi)
        assert abs(val - faddeev_G_regular(lam, 1.5)) < 1e-6
    z = 1e-7
    assert abs(gplus(z, 1.5) - np.log(z) / (2 * np.pi) - gplus_regular(1.5)) < 1e-6


def test_singular_and_forbidden_arguments():
    with pytest.raises(SingularPointError):
        faddeev_G(0.0, 2.0, 1.0)
    with pytest.raises(DomainError):
        faddeev_G(0.3, np.exp(0.5j), 1.0)
    with pytest.raises(DomainError):
        faddeev_G(0.3, 0.0, 1.0)
    with pytest.raises(DomainError):
        check_dbar_identity(0.3, 1.0005, 1.0, 1e-3)


def test_k_map_roundtrip_and_null_vector():
    lam = 1.7 * np.exp(0.9j)
    k1, k2 = k_of_lambda(lam, 2.0)
    assert abs(k1 * k1 + k2 * k2 - 2.0) < 1e-12
    assert abs(lambda_of_k(k1, k2, 2.0) - lam) < 1e-12
    assert abs((k1 + 1j * k2) - np.sqrt(2.0) * lam) < 1e-12


def test_symbol_zeros():
    lam = 2.2 * np.exp(-0.4j)
    for eta in symbol_zeros(lam, 1.7):
        assert abs(symbol_P(eta, lam, 1.7)) < 1e-12


def test_envelope_values():
    assert envelope(0.1) == pytest.approx(np.log(10))
    assert envelope(4.0) == pytest.approx(0.25)


@settings(max_examples=40, deadline=None)
@given(r=st.floats(0.1, 10).filter(lambda r: abs(r - 1) > 1e-2), t=st.floats(0, 2 * np.pi),
       x=st.floats(-3, 3), y=st.floats(-3, 3))
def test_symmetry_under_reflection(r, t, x, y):
    z = complex(x, y)
    if abs(z) < 1e-3:
        return
    lam = r * np.exp(1j * t)
    a = faddeev_G(z, lam, 1.0)
    b = faddeev_G(z, -1 / np.conj(lam), 1.0)
    assert abs(a - b) < 1e-9 * max(1.0, abs(a))


def test_dbar_identity_second_order():
    z, lam = 0.4 - 0.3j, 3.0 * np.exp(0.5j)
    r1 = check_dbar_identity(z, lam, 1.0, 4e-2)
    r2 = check_dbar_identity(z, lam, 1.0, 2e-2)
    assert 3.0 < r1 / r2 < 5.0
    assert check_dbar_identity(z, lam, 1.0, 1e-3, conjugate=True) < 1e-4


def test_table_holds_g_on_difference_grid():
    g = SpatialGrid(0j, 1.0, 8)
    lam = 2.0 * np.exp(0.3j)
    t = build_faddeev_table(lam, 1.0, g)
    h = g.h
    # entry (2, 3) is the offset 2h + 3ih; entry (-1, -2) wraps around
    assert abs(t.values[2, 3] - faddeev_g(h * (2 + 3j), lam, 1.0)) < 1e-14
    assert abs(t.values[-1, -2] - faddeev_g(h * (-1 - 2j), lam, 1.0)) < 1e-14
    assert t.weights.shape == (16, 16)
