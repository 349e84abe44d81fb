"""Independent reference computations used as test oracles.

None of these call into the package: they evaluate the same quantities
by different routes (Fourier integrals, series, brute-force quadrature).
"""
import numpy as np
from scipy import integrate, special


def kvec(lam, E):
    s = np.sqrt(E)
    return (lam + 1 / lam) * s / 2, (1 / lam - lam) * 1j * s / 2


def g_fourier(z, lam, E):
    """g(z, k(lambda)) from its Fourier integral, inner integral in closed form.

    g(x) = -(2 pi)^-2 int e^{i xi.x} / (|xi|^2 + 2 k.xi) d xi.  In the frame
    e1 = Im k/|Im k|, e2 = Re k/|Re k| the integral over the e1 component is
    done by residues; the remaining one-dimensional integral by QUADPACK.
    """
    k1, k2 = kvec(lam, E)
    kR = np.array([k1.real, k2.real])
    kI = np.array([k1.imag, k2.imag])
    a = np.linalg.norm(kR)
    b = np.linalg.norm(kI)
    e1 = kI / b
    e2 = kR / a
    x = np.array([z.real, z.imag])
    X = x @ e1
    Y = x @ e2

    def inner(t):
        c = (t + a) ** 2 - E
        if c < 0:
            if X >= 0:
                return 0.0
            w = np.sqrt(-c)
            return 2 * np.pi * np.exp(b * X) * np.sin(w * X) / w
        q = np.sqrt(c)
        if X > 0:
            return np.pi * np.exp(-(q - b) * X) / q if q > b else 0.0
        return np.pi / q * (np.exp((b + q) * X) - (np.exp((b - q) * X) if q < b else 0.0))
    se = np.sqrt(E)
    bps = sorted([-a - se, -a + se, 0.0, -2 * a])
    lo, hi = bps[0] - 5, bps[-1] + 5
    pts = [lo] + bps + [hi]
    tot = 0j
    for u, v in zip(pts[:-1], pts[1:]):
        re = integrate.quad(lambda t: inner(t) * np.cos(t * Y), u, v, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
        im = integrate.quad(lambda t: inner(t) * np.sin(t * Y), u, v, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
        tot += re + 1j * im
    for u, sgn in ((hi, 1), (lo, -1)):
        f = (lambda t: inner(t)) if sgn == 1 else (lambda t: inner(-t))
        start = u if sgn == 1 else -u
        if Y != 0:
            rc = integrate.quad(f, start, np.inf, weight="cos", wvar=Y, limlst=200)[0]
            rs = integrate.quad(f, start, np.inf, weight="sin", wvar=Y, limlst=200)[0]
        else:
            rc, rs = integrate.quad(f, start, np.inf)[0], 0.0
        tot += rc + sgn * 1j * rs
    return -tot / (4 * np.pi ** 2)


def phi0(z, lam, E):
    return np.exp(0.5j * np.sqrt(E) * (lam * np.conj(z) + z / lam))


def bessel_series(n, x, terms=60):
    """J_n(x) from its power series (n >= 0)."""
    k = np.arange(terms)
    lg = special.gammaln(k + 1) + special.gammaln(k + n + 1)
    return float(np.sum((-1.0) ** k * np.exp((2 * k + n) * np.log(x / 2) - lg)))


def bessel_ratio_series(n, x):
    """x J_n'(x) / J_n(x) from the series, using J_n' = (J_{n-1} - J_{n+1})/2."""
    n = abs(n)
    jn = bessel_series(n, x)
    jm = bessel_series(n - 1, x) if n > 0 else -bessel_series(1, x)
    jp = bessel_series(n + 1, x)
    return x * 0.5 * (jm - jp) / jn


def theta_integral_gl(lam, s, m=4000):
    """(1/2) int dt / (s - e^{it}) over the half circle by Gauss-Legendre.

    The arc is arg(lam) - pi < t < arg(lam) for |lam| > 1, otherwise
    arg(lam) < t < arg(lam) + pi.
    """
    phi = np.angle(lam)
    ta = phi - np.pi if abs(lam) > 1 else phi
    x, w = np.polynomial.legendre.leggauss(m)
    t = ta + 0.5 * np.pi * (x + 1)
    return 0.5 * 0.5 * np.pi * np.sum(w / (s - np.exp(1j * t)))


def G_jump_brute(z, lam, E, cfun, A, N=20000):
    """(2 pi)^-2 int_{dD} c(lam, s) phi0(z, s) ds by an offset trapezoid rule.

    ``cfun(lam, s)`` evaluates the kernel; the logarithmic singularities are
    integrable, so the shifted rule converges (slowly) without special care.
    """
    t = 2 * np.pi * (np.arange(N) + 0.37) / N
    out = A * np.exp(1j * t)
    inn = np.exp(1j * t) / A
    f = lambda v: phi0(z, v, E)
    tot = np.sum(cfun(lam, out) * f(out) * 1j * out) - np.sum(cfun(lam, inn) * f(inn) * 1j * inn)
    return (2 * np.pi / N) * tot / (4 * np.pi ** 2)


def faddeev_G_integral(z, lam, E, n=400):
    """G(z, k(lambda)) from its representation as the unit-circle limit plus a radial integral.

    The limit on |lambda| = 1 (from the side of lambda) is the outgoing
    Green function plus an arc integral of plane waves; the remaining
    dependence on ln|lambda| is a Gauss-Legendre integral.
    """
    se = np.sqrt(E)
    rho = abs(lam)
    ph = np.angle(lam)
    sgn = 1.0 if rho > 1 else -1.0
    w = z * np.exp(-1j * ph)
    X, Y = w.real, w.imag
    ta, tb = (ph - np.pi, ph) if sgn > 0 else (ph, ph + np.pi)
    tn, tw = np.polynomial.legendre.leggauss(n)
    tau = 0.5 * (tb - ta) * tn + 0.5 * (tb + ta)
    wt = 0.5 * (tb - ta) * tw
    S = np.sum(wt * np.exp(1j * se * np.real(np.exp(1j * tau) * np.conj(z))))
    glim = -0.25j * special.hankel1(0, se * abs(z)) + 1j / (4 * np.pi) * S
    s1 = np.log(rho)
    ss = 0.5 * s1 * tn + 0.5 * s1
    sw = 0.5 * s1 * tw
    F = np.exp(1j * se * X * np.cosh(ss) + se * Y * np.sinh(ss))
    return glim + sgn / (2 * np.pi) * np.sum(sw * F).real
