"""Faddeev Green functions and the outgoing Helmholtz Green function.

The Faddeev function G(z, k(lambda)) is real valued.  It is evaluated from
its derivative in lambda-bar, which is an explicit exponential, integrated
along the ray through lambda starting from its limit on the unit circle:

    G(z, lambda) = G_unit(z, arg lambda) + (1/2pi) Re int_0^{ln|lambda|} F(s) ds,
    F(s) = exp(i sqrt(E) X cosh s + sqrt(E) Y sinh s),

where X + iY = z exp(-i arg lambda), |lambda| > 1, and G_unit is the Hankel
function plus a half-circle average of plane waves.  When F decays along the
ray the same quantity is obtained, without cancellation, as
-(1/2pi) Re int_{ln|lambda|}^inf F(s) ds.  Points with |lambda| < 1 use the
symmetry G(lambda) = G(-1/conj(lambda)).
"""
import math
from dataclasses import dataclass

import numba
import numpy as np

from ._bessel import EULER_GAMMA, bessel01, bessel_j0, hankel0
from .core import DomainError, SingularPointError, SpatialGrid, phi0

# 16-point Gauss-Legendre rule on [0, 1]
_x, _w = np.polynomial.legendre.leggauss(16)
GL_X = 0.5 * (_x + 1.0)
GL_W = 0.5 * _w
del _x, _w

# punctured-trapezoid correction constants for ln|x| on the unit square lattice:
# int ln|x| f = h^2 sum' ln|x_j| f_j + h^2 f(0) (ln h + LOG_LATTICE_C0)
#               + h^4 LOG_LATTICE_C1 lap f(0) + O(h^6)
LOG_LATTICE_C0 = math.log(2.0) + 0.5 * math.log(math.pi) - 2.0 * math.lgamma(0.25)
LOG_LATTICE_C1 = -0.0242967

_DECAY_SWITCH = 2.0      # switch to the decaying-tail integral below exp(-2)
_TAIL = 38.0             # exp(-38) ~ 3e-17


@numba.njit(cache=True)
def _faddeev_point(x1, x2, lam, sqrtE, grad):
    rho = abs(lam)
    if rho < 1.0:
        lam = -1.0 / lam.conjugate()
        rho = 1.0 / rho
    phi = math.atan2(lam.imag, lam.real)
    cp = math.cos(phi)
    sp = math.sin(phi)
    X = x1 * cp + x2 * sp
    Y = -x1 * sp + x2 * cp
    L = math.log(rho)
    sh = math.sinh(L)
    ch = math.cosh(L)
    growth = sqrtE * Y * sh
    dX = 0.0
    dY = 0.0
    if growth >= -_DECAY_SWITCH:
        r = math.hypot(x1, x2)
        xr = sqrtE * r
        j0, y0, j1, y1 = bessel01(xr)
        G = 0.25 * y0
        gx = -0.25 * sqrtE * y1 * x1 / r
        gy = -0.25 * sqrtE * y1 * x2 / r
        # half circle u in (-pi, 0) of sin(sqrtE (X cos u + Y sin u))
        npan = 1 + int(2.0 * xr / 3.0)
        du = math.pi / npan
        S = 0.0
        Sx = 0.0
        Sy = 0.0
        for p in range(npan):
            for q in range(16):
                u = -math.pi + du * (p + GL_X[q])
                arg = sqrtE * (X * math.cos(u) + Y * math.sin(u))
                wq = du * GL_W[q]
                S += wq * math.sin(arg)
                if grad:
                    c = wq * math.cos(arg) * sqrtE
                    Sx += c * math.cos(phi + u)
                    Sy += c * math.sin(phi + u)
        G -= S / (4.0 * math.pi)
        gx -= Sx / (4.0 * math.pi)
        gy -= Sy / (4.0 * math.pi)
        # ray from the unit circle to |lambda|
        span = sqrtE * abs(X) * (ch - 1.0) + abs(growth)
        npan = 1 + int(span / 3.0)
        ds = L / npan
        I = 0.0
        for p in range(npan):
            for q in range(16):
                s = ds * (p + GL_X[q])
                chs = math.cosh(s)
                shs = math.sinh(s)
                e = math.exp(sqrtE * Y * shs) * ds * GL_W[q]
                th = sqrtE * X * chs
                cth = math.cos(th)
                I += e * cth
                if grad:
                    dX -= e * sqrtE * chs * math.sin(th)
                    dY += e * sqrtE * shs * cth
        G += I / (2.0 * math.pi)
        if grad:
            gx += (cp * dX - sp * dY) / (2.0 * math.pi)
            gy += (sp * dX + cp * dY) / (2.0 * math.pi)
        return G, gx, gy
    # decaying direction: integrate the tail beyond |lambda| in t = sinh s
    rate = -sqrtE * Y
    T = _TAIL / rate
    t0 = sh
    t1 = sh + T
    span = sqrtE * abs(X) * (math.sqrt(1.0 + t1 * t1) - ch) + _TAIL
    npan = 1 + int(span / 3.0)
    dt = T / npan
    I = 0.0
    for p in range(npan):
        for q in range(16):
            t = t0 + dt * (p + GL_X[q])
            st = math.sqrt(1.0 + t * t)
            e = math.exp(-rate * (t - t0) + growth) * dt * GL_W[q]
            th = sqrtE * X * st
            cth = math.cos(th)
            I += e * cth / st
            if grad:
                dX -= e * sqrtE * math.sin(th)
                dY += e * sqrtE * t * cth / st
    G = -I / (2.0 * math.pi)
    gx = 0.0
    gy = 0.0
    if grad:
        gx = -(cp * dX - sp * dY) / (2.0 * math.pi)
        gy = -(sp * dX + cp * dY) / (2.0 * math.pi)
    return G, gx, gy


@numba.njit(cache=True)
def _faddeev_many(x1, x2, lam, sqrtE, grad, out):
    for i in range(x1.size):
        a, b, c = _faddeev_point(x1[i], x2[i], lam[i], sqrtE, grad)
        out[0, i] = a
        out[1, i] = b
        out[2, i] = c


def _check_lambda(lam):
    lam = np.asarray(lam, dtype=complex)
    if np.any(lam == 0):
        raise DomainError("lambda = 0 is not admissible")
    if np.any(np.abs(np.abs(lam) - 1.0) < 1e-14):
        raise DomainError("lambda on the unit circle is not admissible")
    return lam


def k_of_lambda(lam, E):
    """Return the complex vector (k1, k2) with k1 + i k2 = sqrt(E) lambda."""
    lam = np.asarray(lam, dtype=complex)
    if np.any(lam == 0):
        raise DomainError("lambda = 0 is not admissible")
    s = np.sqrt(E)
    return 0.5 * s * (lam + 1 / lam), 0.5j * s * (1 / lam - lam)


def lambda_of_k(k1, k2, E):
    """Inverse of k_of_lambda."""
    return (np.asarray(k1) + 1j * np.asarray(k2)) / np.sqrt(E)


def faddeev_G(z, lam, E, grad=False):
    """Faddeev Green function G(z, k(lambda)) (real) for z != 0.

    With grad=True returns (G, dG/dx1, dG/dx2).
    """
    z = np.asarray(z, dtype=complex)
    lam = _check_lambda(lam)
    z, lam = np.broadcast_arrays(z, lam)
    if np.any(z == 0):
        raise SingularPointError("G is singular at z = 0")
    shape = z.shape
    zf = np.ascontiguousarray(z.ravel())
    out = np.empty((3, zf.size))
    _faddeev_many(zf.real.copy(), zf.imag.copy(),
                  np.ascontiguousarray(lam.ravel()), float(np.sqrt(E)), bool(grad), out)
    if grad:
        return tuple(o.reshape(shape) for o in out)
    return out[0].reshape(shape)


def faddeev_g(z, lam, E):
    """g(z, k) = G(z, k) exp(-i k.x), bounded in z."""
    z = np.asarray(z, dtype=complex)
    return faddeev_G(z, lam, E) * phi0(z, -np.asarray(lam, dtype=complex), E)


def faddeev_G_regular(lam, E):
    """Limit of G(z) - ln|z|/(2 pi) as z -> 0."""
    lam = _check_lambda(lam)
    return (np.log(np.sqrt(E) / 2) + EULER_GAMMA + np.abs(np.log(np.abs(lam)))) / (2 * np.pi)


def gplus(z, E):
    """Outgoing Green function G+(z) = -(i/4) H_0^(1)(sqrt(E)|z|)."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise SingularPointError("G+ is singular at z = 0")
    return -0.25j * hankel0(np.sqrt(E) * np.abs(z))


def gplus_regular(E):
    """Limit of G+(z) - ln|z|/(2 pi) as z -> 0."""
    return (np.log(np.sqrt(E) / 2) + EULER_GAMMA) / (2 * np.pi) - 0.25j


def symbol_P(eta, lam, E):
    """Symbol |xi|^2 + 2 k.xi of the operator conjugated by exp(ikx), eta = xi1 + i xi2."""
    eta = np.asarray(eta, dtype=complex)
    return np.abs(eta) ** 2 + np.sqrt(E) * (lam * np.conj(eta) + eta / lam)


def symbol_zeros(lam, E):
    """The two real zeros of symbol_P: 0 and -sqrt(E)(lambda + 1/conj(lambda))."""
    return 0j, -np.sqrt(E) * (lam + 1 / np.conj(lam))


def envelope(tau):
    """f(tau) = ln(1/tau) for tau < 1/2 and 1/tau otherwise."""
    tau = np.asarray(tau, dtype=float)
    return np.where(tau < 0.5, np.log(1 / np.minimum(tau, 0.5)), 1 / np.maximum(tau, 1e-300))


@dataclass(frozen=True)
class FaddeevTable:
    """Convolution weights for g on the difference grid of a spatial grid.

    ``values`` holds g at the nodes (j, k) h with |j|, |k| < n, stored with
    wrap-around indexing on a (2n, 2n) array; the z = 0 entry holds the
    effective value of the corrected trapezoid rule, and ``weights`` is the
    full quadrature kernel including the h^2 factor and the stencil correction.
    """
    lam: complex
    E: float
    grid: SpatialGrid
    values: np.ndarray
    weights: np.ndarray

    def fft(self):
        return np.fft.fft2(self.weights)


def _difference_offsets(n, h):
    a = np.fft.fftfreq(2 * n, 1.0 / (2 * n))   # 0..n-1, -n..-1
    A, B = np.meshgrid(a, a, indexing="ij")
    return h * (A + 1j * B)


def _corrected_kernel(values, reg0, amp_nbrs, h):
    # values: kernel samples with the origin entry unset; amp_nbrs: smooth
    # factor multiplying ln|x| at the four nearest neighbours
    w = h * h * values
    c0 = (np.log(h) + LOG_LATTICE_C0) / (2 * np.pi) + reg0
    w[0, 0] = h * h * c0
    c1 = h * h * LOG_LATTICE_C1 / (2 * np.pi)
    w[0, 0] -= 4 * c1
    for (i, j), a in amp_nbrs.items():
        w[i, j] += c1 * a
    return c0, w


def build_faddeev_table(lam, E, grid):
    """Tabulate g(., k(lambda)) on the difference grid of ``grid``."""
    lam = complex(_check_lambda(lam))
    n, h = grid.n, grid.h
    Z = _difference_offsets(n, h)
    vals = np.zeros(Z.shape, dtype=complex)
    mask = Z != 0
    mask[n, :] = False
    mask[:, n] = False
    vals[mask] = faddeev_g(Z[mask], lam, E)
    sq = np.sqrt(E)
    nb = {}
    for (i, j) in [(1, 0), (-1, 0), (0, 1), (0, -1)]:
        zz = h * (i + 1j * j)
        nb[(i, j)] = bessel_j0(sq * h) * phi0(zz, -lam, E)
    c0, w = _corrected_kernel(vals.copy(), faddeev_G_regular(lam, E), nb, h)
    vals[0, 0] = c0
    return FaddeevTable(lam, float(E), grid.difference_grid(), vals, w)


def build_gplus_table(E, grid):
    """Same as build_faddeev_table for the outgoing kernel G+."""
    n, h = grid.n, grid.h
    Z = _difference_offsets(n, h)
    vals = np.zeros(Z.shape, dtype=complex)
    mask = Z != 0
    mask[n, :] = False
    mask[:, n] = False
    vals[mask] = gplus(Z[mask], E)
    a = complex(bessel_j0(np.sqrt(E) * h))
    nb = {(1, 0): a, (-1, 0): a, (0, 1): a, (0, -1): a}
    c0, w = _corrected_kernel(vals.copy(), gplus_regular(E), nb, h)
    vals[0, 0] = c0
    return FaddeevTable(0j, float(E), grid.difference_grid(), vals, w)


def check_dbar_identity(z, lam, E, step, conjugate=False):
    """Residual of the lambda-bar derivative identity of G at (z, lambda).

    Compares the central-difference Wirtinger derivative d/d(lambda-bar) of
    G(z, k(lambda)) with sgn(|lambda|^2 - 1)/(4 pi conj(lambda)) *
    exp(-i sqrt(E)/2 (conj(lambda) z + conj(z)/conj(lambda))).  With
    conjugate=True the d/d(lambda) derivative is compared with the complex
    conjugate expression instead.
    """
    lam = complex(lam)
    rad = np.abs(np.array([lam + step, lam - step, lam + 1j * step, lam - 1j * step]))
    if np.any(rad <= 1) and np.any(rad >= 1) or abs(lam) == 0 or abs(lam) - step <= 0:
        raise DomainError("finite-difference stencil crosses |lambda| = 1")
    f = lambda l: faddeev_G(z, l, E)
    dx = (f(lam + step) - f(lam - step)) / (2 * step)
    dy = (f(lam + 1j * step) - f(lam - 1j * step)) / (2 * step)
    sgn = np.sign(abs(lam) ** 2 - 1)
    lb = np.conj(lam)
    rhs = sgn / (4 * np.pi * lb) * np.exp(-0.5j * np.sqrt(E) * (lb * z + np.conj(z) / lb))
    if conjugate:
        return float(abs(0.5 * (dx - 1j * dy) - np.conj(rhs)))
    return float(abs(0.5 * (dx + 1j * dy) - rhs))
