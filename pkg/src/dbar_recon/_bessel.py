"""Bessel functions of order 0 and 1 and the Hankel function H_0^(1).

Power series below ``SWITCH`` and the Hankel asymptotic expansion above it.
Both branches are written as scalar numba kernels so they can be called
from the Green-function kernels; thin numpy wrappers are provided.
"""
import math

import numba
import numpy as np

SWITCH = 12.0
EULER_GAMMA = 0.5772156649015329
_TWO_OVER_PI = 2.0 / math.pi


@numba.njit(cache=True)
def _series(x):
    # J0, Y0, J1, Y1 from the ascending series
    q = 0.25 * x * x
    half = 0.5 * x
    j0 = 0.0
    j1 = 0.0
    s0 = 0.0
    s1 = 0.0
    t0 = 1.0           # (-q)^m / (m!)^2
    t1 = 1.0           # (-q)^m / (m! (m+1)!)
    hm = 0.0           # harmonic number H_m
    m = 0
    while True:
        hm1 = hm + 1.0 / (m + 1)
        j0 += t0
        j1 += t1
        s0 += hm * t0
        s1 += (hm + hm1) * t1
        if m > 4 and abs(t0) < 1e-18 * (abs(j0) + 1e-300) and abs(t1) < 1e-18 * (abs(j1) + 1e-300):
            break
        m += 1
        t0 = -t0 * q / (m * m)
        t1 = -t1 * q / (m * (m + 1))
        hm = hm1
        if m > 200:
            break
    lg = math.log(half) + EULER_GAMMA
    j1 *= half
    y0 = _TWO_OVER_PI * (lg * j0 - s0)
    y1 = _TWO_OVER_PI * lg * j1 - _TWO_OVER_PI / x - half * s1 / math.pi
    return j0, y0, j1, y1


@numba.njit(cache=True)
def _pq(nu, x):
    # P and Q of the Hankel expansion, summed until the terms stop decreasing
    mu = 4.0 * nu * nu
    p = 1.0
    q = 0.0
    term = 1.0
    last = 1e300
    k = 1
    while k < 120:
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(term) > last:
            break
        last = abs(term)
        if k % 2 == 1:
            # k = 2j+1 contributes (-1)^j to Q
            if (k // 2) % 2 == 0:
                q += term
            else:
                q -= term
        else:
            if (k // 2) % 2 == 0:
                p += term
            else:
                p -= term
        if last < 1e-17:
            break
        k += 1
    return p, q


@numba.njit(cache=True)
def _asymptotic(x):
    amp = math.sqrt(_TWO_OVER_PI / x)
    p0, q0 = _pq(0.0, x)
    p1, q1 = _pq(1.0, x)
    c0 = x - 0.25 * math.pi
    c1 = x - 0.75 * math.pi
    j0 = amp * (p0 * math.cos(c0) - q0 * math.sin(c0))
    y0 = amp * (p0 * math.sin(c0) + q0 * math.cos(c0))
    j1 = amp * (p1 * math.cos(c1) - q1 * math.sin(c1))
    y1 = amp * (p1 * math.sin(c1) + q1 * math.cos(c1))
    return j0, y0, j1, y1


@numba.njit(cache=True)
def bessel01(x):
    """Return (J0, Y0, J1, Y1) at x > 0."""
    if x < SWITCH:
        return _series(x)
    return _asymptotic(x)


@numba.njit(cache=True)
def _bessel01_array(x, out):
    for i in range(x.size):
        a, b, c, d = bessel01(x[i])
        out[0, i] = a
        out[1, i] = b
        out[2, i] = c
        out[3, i] = d


def bessel_j0y0j1y1(x):
    """Vectorized (J0, Y0, J1, Y1) for positive arguments."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("Bessel evaluation requires positive arguments")
    flat = np.ascontiguousarray(x.ravel())
    out = np.empty((4, flat.size))
    _bessel01_array(flat, out)
    return tuple(o.reshape(x.shape) for o in out)


def bessel_j0(x):
    """J0 for x >= 0 (entire, so x = 0 is allowed)."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    res = np.ones_like(ax)
    pos = ax > 0
    if np.any(pos):
        res[pos] = bessel_j0y0j1y1(ax[pos])[0]
    return res


def hankel0(x):
    """H_0^(1)(x) = J0(x) + i Y0(x) for x > 0."""
    j0, y0, _, _ = bessel_j0y0j1y1(x)
    return j0 + 1j * y0
