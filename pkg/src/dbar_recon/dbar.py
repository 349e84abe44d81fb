"""Inverse-stage operators on the lambda plane.

The unknown lives on the plane nodes of a LambdaGrid (outside the ring D)
and on the nodes of the two circles of dD, where it holds the trace from the
interior of D.  Conventions:

* ``dbar_inverse`` is the solid Cauchy transform -(1/pi) int f / (s - lambda),
  computed mode by mode in angle with exact radial kernels.
* The jump kernel c(lambda, s) has logarithmic singularities at s = lambda and
  at s = -1/conj(lambda); integrals against it use product quadrature.
* The integral equation solved is  mu' - 1 = T1 mu' - T2 mu'  (see
  ``solve_mu_prime``), where T1 phi = dbar_inverse(r' e0 conj(phi)) and T2 is
  the boundary operator built from c and h on dD x dD.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .core import DbarError, SingularPointError, e0, phi0


# ---------------------------------------------------------------------------
# the kernel c

def theta_integral(lam, s):
    """(1/2) int over the half unit circle selected by the Heaviside factor of d tau / (s - e^{i tau}).

    For |lam| > 1 the arc is arg(lam) - pi < tau < arg(lam), otherwise
    arg(lam) < tau < arg(lam) + pi.  Closed form with continuous logarithms.
    """
    lam = np.asarray(lam, dtype=complex)
    s = np.asarray(s, dtype=complex)
    phi = np.angle(lam)
    outer = np.abs(lam) > 1
    ta = np.where(outer, phi - np.pi, phi)
    tb = ta + np.pi
    big = np.abs(s) > 1
    with np.errstate(divide="ignore", invalid="ignore"):
        d_big = np.log(1 - np.exp(1j * tb) / s) - np.log(1 - np.exp(1j * ta) / s)
        d_small = 1j * np.pi + np.log(1 - s * np.exp(-1j * tb)) - np.log(1 - s * np.exp(-1j * ta))
    dlog = np.where(big, d_big, d_small)
    return 0.5 * (1j * np.pi - dlog) / (1j * s)


def _logs(lam, s):
    lam0 = lam / np.abs(lam)
    ln1 = np.log((s - lam) / (s - lam0))
    ln2 = np.log((-1 / s - np.conj(lam)) / (-1 / s - np.conj(lam0)))
    return ln1, ln2


def kernel_c(lam, s):
    """Jump kernel c(lambda, s) for lambda, s on dD (principal logarithms)."""
    lam = np.asarray(lam, dtype=complex)
    s = np.asarray(s, dtype=complex)
    if np.any(np.isclose(s, lam, rtol=0, atol=1e-14)) or \
            np.any(np.isclose(s, -1 / np.conj(lam), rtol=0, atol=1e-14)):
        raise SingularPointError("c(lambda, s) is singular at s = lambda and s = -1/conj(lambda)")
    sgn = np.sign(np.abs(lam) ** 2 - 1)
    ln1, ln2 = _logs(lam, s)
    return 0.5j * sgn * (ln1 - ln2) / s + theta_integral(lam, s)


def _periodic_log_weights(N, shift):
    """W[i, j]: int_0^{2pi} log(1 - e^{i(s_i + shift - t)}) f(t) dt ~ sum_j W[i, j] f(t_j)."""
    # circulant: W[i, j] = w[(i - j) mod N]
    k = np.arange(N)
    m = np.arange(1, N // 2 + 1)
    coef = 1.0 / m
    coef[-1] *= 0.5
    w = -(2 * np.pi / N) * (np.exp(1j * np.outer(2 * np.pi * k / N + shift, m)) @ coef)
    return w[(k[:, None] - k[None, :]) % N]


def _fix_branch(diag, left, right):
    # choose diag + 2 pi i k closest to the mean of the neighbours
    target = 0.5 * (left + right).imag
    k = np.round((target - diag.imag) / (2 * np.pi))
    return diag + 2j * np.pi * k


@dataclass
class RingKernel:
    """Product-quadrature matrix for integrals against c on dD.

    ``quad[i, j]`` gives  int_{dD} c(ring_i, s) f(s) ds ~ sum_j quad[i, j] f(ring_j)
    for smooth f, with ds along the orientation of dD.
    """
    A: float
    n_ring: int
    quad: np.ndarray
    nodes: np.ndarray

    @classmethod
    def build(cls, lgrid):
        A = lgrid.A
        N = lgrid.n_ring
        circles = lgrid.circles
        nodes = lgrid.ring_nodes
        t = 2 * np.pi * np.arange(N) / N
        W0 = _periodic_log_weights(N, 0.0)
        Wpi = _periodic_log_weights(N, np.pi)
        quad = np.zeros((2 * N, 2 * N), dtype=complex)
        for a, ca in enumerate(circles):
            lam = ca.nodes
            rho = ca.radius
            sgn = np.sign(rho ** 2 - 1)
            # near its singular point each logarithm behaves like log(+-i delta rho/|rho - 1|),
            # delta the angular offset; sgn selects the matching periodic log
            diag = np.full(N, np.log(rho / abs(rho - 1)), dtype=complex)
            for b, cb in enumerate(circles):
                s = cb.nodes
                jac = cb.orientation * 1j * cb.radius * np.exp(1j * t)
                L, S = lam[:, None], s[None, :]
                with np.errstate(divide="ignore", invalid="ignore"):
                    ln1, ln2 = _logs(L, S)
                    th = theta_integral(L, S)
                pref = 0.5j * sgn / S
                i = np.arange(N)
                if a == b:
                    # singular at s = lambda (j = i)
                    jj = i
                    u = sgn * (t[:, None] - t[None, :])
                    W = W0 if sgn > 0 else np.conj(W0)
                else:
                    # singular at s = -1/conj(lambda) (j = i + N/2)
                    jj = (i + N // 2) % N
                    u = -sgn * (t[:, None] + np.pi - t[None, :])
                    W = np.conj(Wpi) if sgn > 0 else Wpi
                with np.errstate(divide="ignore", invalid="ignore"):
                    sing = np.log(1 - np.exp(1j * u))
                    R = (ln1 if a == b else ln2) - sing
                R[i, jj] = _fix_branch(diag, R[i, (jj - 1) % N], R[i, (jj + 1) % N])
                with np.errstate(divide="ignore", invalid="ignore"):
                    pair = _logs(lam, s[jj])
                if a == b:
                    ln2[i, jj] = pair[1]
                    smooth = pref * (R - ln2) + th
                    sgn_w = 1.0
                else:
                    ln1[i, jj] = pair[0]
                    smooth = pref * (ln1 - R) + th
                    sgn_w = -1.0
                blk = (2 * np.pi / N) * smooth * jac[None, :] \
                    + sgn_w * pref * jac[None, :] * W
                if not np.all(np.isfinite(blk)):
                    raise DbarError("non-finite ring kernel entries (branch resolution failed)")
                quad[a * N:(a + 1) * N, b * N:(b + 1) * N] = blk
        return cls(A, N, quad, nodes)

    def values(self):
        """c(ring_i, ring_j), NaN at the singular pairs."""
        L = self.nodes[:, None]
        S = self.nodes[None, :]
        out = np.full(L.shape[:1] + S.shape[1:], np.nan + 0j)
        ok = ~(np.isclose(S, L, atol=1e-12, rtol=0) | np.isclose(S, -1 / np.conj(L), atol=1e-12, rtol=0))
        ii, jj = np.nonzero(ok)
        out[ii, jj] = kernel_c(self.nodes[ii], self.nodes[jj])
        return out


# ---------------------------------------------------------------------------
# solid Cauchy transform on the polar plane grid

def _lagrange_matrix(x_nodes, x_eval):
    """Barycentric Lagrange interpolation matrix."""
    n = x_nodes.size
    w = np.ones(n)
    for j in range(n):
        d = x_nodes[j] - np.delete(x_nodes, j)
        w[j] = 1.0 / np.prod(d)
    diff = x_eval[:, None] - x_nodes[None, :]
    exact = diff == 0
    diff[exact] = 1.0
    tmp = w[None, :] / diff
    M = tmp / np.sum(tmp, axis=1, keepdims=True)
    rows = np.nonzero(exact.any(axis=1))[0]
    for r in rows:
        M[r] = exact[r].astype(float)
    return M


class DbarInverse:
    """-(1/pi) int f(s)/(s - lambda) over the plane nodes of a LambdaGrid.

    Angular Fourier modes are mapped exactly (output mode m from input mode
    m + 1 with radial kernel (rho/s)^m); radial integrals use the Gauss
    nodes in ln|s|, with interpolated sub-interval rules for the partial
    annulus containing the target radius.
    """

    def __init__(self, lgrid, extra_radii=()):
        self.lgrid = lgrid
        self.n_theta = lgrid.n_plane
        radii, wts = lgrid.radii
        self.src = radii
        self.src_w = wts
        nr = lgrid.n_radial
        A, R = lgrid.A, lgrid.R_max
        self.annuli = [(1 / R, 1 / A, slice(0, nr)), (A, R, slice(nr, 2 * nr))]
        self.targets = np.concatenate([radii, [A, 1 / A], np.asarray(extra_radii, float)])
        self.modes = np.fft.fftfreq(self.n_theta, 1.0 / self.n_theta).astype(int)
        self.M = self._build()

    def _build(self):
        nm = self.modes.size
        nt = self.targets.size
        ns = self.src.size
        M = np.zeros((nm, nt, ns))
        xg, wg = np.polynomial.legendre.leggauss(self.lgrid.n_radial)
        for ti, rho in enumerate(self.targets):
            for (a, b, sl) in self.annuli:
                s_nodes = self.src[sl]
                t_nodes = np.log(s_nodes)
                for upper in (True, False):
                    # upper: part of the annulus with s > rho (used by m >= 0)
                    lo, hi = (max(a, rho), b) if upper else (a, min(b, rho))
                    if hi <= lo:
                        continue
                    if lo == a and hi == b:
                        ss, ww, L = s_nodes, self.src_w[sl], None
                    else:
                        tl, th = np.log(lo), np.log(hi)
                        tt = 0.5 * (th - tl) * xg + 0.5 * (th + tl)
                        ss, ww = np.exp(tt), 0.5 * (th - tl) * wg
                        L = _lagrange_matrix(t_nodes, tt)
                    sel = self.modes >= 0 if upper else self.modes < 0
                    ms = self.modes[sel]
                    sign = -2.0 if upper else 2.0
                    kern = sign * (rho / ss)[None, :] ** ms[:, None] * (ss * ww)[None, :]
                    if L is not None:
                        kern = kern @ L
                    M[np.nonzero(sel)[0], ti, sl] += kern
        return M

    def modes_at_targets(self, f):
        """Angular Fourier coefficients of the transform at every target radius."""
        fh = np.fft.fft(f, axis=1) / self.n_theta
        fh = np.roll(fh, -1, axis=1)          # input mode m + 1 feeds output mode m
        return np.einsum("mts,sm->tm", self.M, fh)

    def __call__(self, f, ring_angles=None):
        """Transform at plane nodes, and at dD nodes when ``ring_angles`` is given."""
        oh = self.modes_at_targets(np.asarray(f, dtype=complex))
        ns = self.src.size
        plane = np.fft.ifft(oh[:ns], axis=1) * self.n_theta
        if ring_angles is None:
            return plane
        E = np.exp(1j * np.outer(self.modes, ring_angles))
        ring = np.concatenate([oh[ns] @ E, oh[ns + 1] @ E])
        return plane, ring

    def at_points(self, f, lam):
        """Transform at points whose radii are among the extra targets."""
        lam = np.asarray(lam, dtype=complex)
        oh = self.modes_at_targets(np.asarray(f, dtype=complex))
        out = np.empty(lam.shape, dtype=complex)
        for idx, l in np.ndenumerate(lam):
            k = np.nonzero(np.isclose(self.targets, abs(l), rtol=1e-13, atol=0))[0]
            if k.size == 0:
                raise DbarError("radius not among the prepared targets")
            out[idx] = np.sum(oh[k[0]] * np.exp(1j * self.modes * np.angle(l)))
        return out


def dbar_inverse(f, lgrid, ring=False):
    """Solid Cauchy transform of plane-node values on ``lgrid``."""
    op = DbarInverse(lgrid)
    if ring:
        return op(f, lgrid.circles[0].angles)
    return op(f)


def ring_cauchy_matrix(lgrid, lam):
    """Matrix mapping values F on dD to (1/2 pi i) int_{dD} F(s) ds / (s - lambda).

    For lambda on dD the limit from the interior of D is returned.
    ``lam`` is a flat array of targets; ring targets must coincide with ring nodes.
    """
    N = lgrid.n_ring
    A = lgrid.A
    lam = np.asarray(lam, dtype=complex).ravel()
    m = np.fft.fftfreq(N, 1.0 / N).astype(int)
    t = 2 * np.pi * np.arange(N) / N
    F = np.exp(-1j * np.outer(m, t)) / N           # values -> Fourier coefficients
    out = np.zeros((lam.size, 2 * N), dtype=complex)
    rho = np.abs(lam)
    tol = 1e-12
    for c, (radius, orient, inside_is_D) in enumerate(((A, 1.0, True), (1 / A, -1.0, False))):
        on = np.abs(rho - radius) < tol * radius
        use_inside = (rho < radius - tol * radius) | (on & inside_is_D)
        zeta = lam / radius
        pw = np.zeros((lam.size, N), dtype=complex)
        pos = m >= 0
        neg = ~pos
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            pw_in = np.where(pos[None, :], zeta[:, None] ** np.where(pos, m, 0)[None, :], 0)
            pw_out = np.where(neg[None, :], -(zeta[:, None] ** np.where(neg, m, 0)[None, :]), 0)
        pw = np.where(use_inside[:, None], pw_in, pw_out)
        out[:, c * N:(c + 1) * N] = orient * (pw @ F)
    return out


# ---------------------------------------------------------------------------
# the operators and the integral equation

@dataclass
class MuPrimeField:
    """mu' on the plane nodes and its interior traces on dD, at a point z."""
    z: complex
    plane: np.ndarray
    ring: np.ndarray
    info: dict = None


class DbarSystem:
    """T1 and T2 for all z, assembled once per data set."""

    def __init__(self, data, kernel=None, extra_radii=(), h_order="tz"):
        self.data = data
        lg = data.lgrid
        self.lgrid = lg
        self.E = data.E
        self.kernel = kernel if kernel is not None else RingKernel.build(lg)
        self.dinv = DbarInverse(lg, extra_radii)
        self.plane_nodes = lg.plane_nodes
        self.ring_nodes = lg.ring_nodes
        self.ring_angles = lg.circles[0].angles
        targets = np.concatenate([self.plane_nodes.ravel(), self.ring_nodes])
        self.cauchy = ring_cauchy_matrix(lg, targets)
        # T2 uses h(s', s); the printed a1 formula writes h(s, s')
        h = data.h_ring.T if h_order == "tz" else data.h_ring
        self.KH = self.kernel.quad * h
        self.shape = self.plane_nodes.shape
        self.P = self.plane_nodes.size
        self.NR = self.ring_nodes.size

    def factors(self, z):
        E = self.E
        t1 = self.data.r_plane * e0(z, self.plane_nodes, E)
        return t1, phi0(z, self.ring_nodes, E), phi0(z, -self.ring_nodes, E)

    def T1(self, z, plane, fac=None):
        t1 = self.factors(z)[0] if fac is None else fac[0]
        p, r = self.dinv(t1 * np.conj(plane), self.ring_angles)
        return p, r

    def boundary_density(self, z, ring, fac=None):
        """F(s) = phi0(z,-s) int c(s,s') h(s',s) phi0(z,s') phi(s') ds'."""
        _, pp, pm = self.factors(z) if fac is None else fac
        return pm * (self.KH @ (pp * ring))

    def T2(self, z, ring, fac=None):
        F = self.boundary_density(z, ring, fac)
        out = self.cauchy @ F
        return out[:self.P].reshape(self.shape), out[self.P:]

    def residual(self, z, plane, ring, sign="derived"):
        """(mu' - 1) - T1 mu' + T2 mu' (or the printed (I + T) form with sign='printed')."""
        fac = self.factors(z)
        a_p, a_r = self.T1(z, plane, fac)
        b_p, b_r = self.T2(z, ring, fac)
        s1 = -1.0 if sign == "derived" else 1.0
        return (plane - 1 + s1 * a_p + b_p), (ring - 1 + s1 * a_r + b_r)

    def solve(self, z, tol=1e-11, sign="derived", maxiter=400):
        """Solve for mu'(z, .); returns a MuPrimeField."""
        z = complex(z)
        fac = self.factors(z)
        P, NR = self.P, self.NR
        n = P + NR
        s1 = -1.0 if sign == "derived" else 1.0
        if not np.any(fac[0]) and not np.any(self.KH):
            return MuPrimeField(z, np.ones(self.shape, dtype=complex), np.ones(NR, dtype=complex),
                                {"iterations": 0, "residual": 0.0})

        def apply(xc):
            p = xc[:P].reshape(self.shape)
            r = xc[P:]
            a_p, a_r = self.T1(z, p, fac)
            b_p, b_r = self.T2(z, r, fac)
            return np.concatenate([(p + s1 * a_p + b_p).ravel(), r + s1 * a_r + b_r])
        one_p = np.ones(self.shape, dtype=complex)
        one_r = np.ones(NR, dtype=complex)
        a_p, a_r = self.T1(z, one_p, fac)
        b_p, b_r = self.T2(z, one_r, fac)
        rhs = -np.concatenate([(s1 * a_p + b_p).ravel(), s1 * a_r + b_r])

        def matvec(xr):
            xc = xr[:n] + 1j * xr[n:]
            y = apply(xc)
            return np.concatenate([y.real, y.imag])
        op = spla.LinearOperator((2 * n, 2 * n), matvec=matvec, dtype=float)
        b = np.concatenate([rhs.real, rhs.imag])
        if not np.any(b):
            x = np.zeros(2 * n)
            it = [0]
        else:
            it = [0]

            def cb(_):
                it[0] += 1
            x, flag = spla.gmres(op, b, rtol=tol, atol=0.0, restart=100, maxiter=maxiter,
                                 callback=cb, callback_type="pr_norm")
            if flag != 0:
                raise DbarError(f"integral equation not solved at z={z} (GMRES flag {flag}); "
                                "the discrete operator may be singular for this potential")
        res = np.linalg.norm(matvec(x) - b) / max(np.linalg.norm(b), 1e-300)
        xc = x[:n] + 1j * x[n:]
        return MuPrimeField(z, 1 + xc[:P].reshape(self.shape), 1 + xc[P:],
                            {"iterations": it[0], "residual": float(res)})

    def evaluate(self, sol, lam):
        """mu'(z, lam) = 1 + T1 mu' - T2 mu' at points whose radii are extra targets."""
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        fac = self.factors(sol.z)
        t1 = self.dinv.at_points(fac[0] * np.conj(sol.plane), lam)
        F = self.boundary_density(sol.z, sol.ring, fac)
        t2 = ring_cauchy_matrix(self.lgrid, lam) @ F
        return 1 + t1 - t2

    def a1(self, sol):
        """Coefficient of 1/lambda in mu' - 1 at infinity."""
        fac = self.factors(sol.z)
        w = self.lgrid.plane_weights
        area = np.sum(w * fac[0] * np.conj(sol.plane)) / np.pi
        F = self.boundary_density(sol.z, sol.ring, fac)
        ring = np.sum(F * self.lgrid.ring_dz) / (2j * np.pi)
        return area + ring


def apply_T1(phi_plane, z, data, system=None):
    """T1 phi = dbar_inverse(r' e0(z, .) conj(phi)) at plane and ring nodes."""
    system = system or DbarSystem(data)
    return system.T1(complex(z), phi_plane)


def apply_T2(phi_minus, z, data, kernel=None, system=None):
    """Cauchy integral over dD of the c-h density built from the interior trace."""
    system = system or DbarSystem(data, kernel)
    return system.T2(complex(z), np.asarray(phi_minus, dtype=complex))


def solve_mu_prime(z, data, kernel=None, system=None, **kw):
    system = system or DbarSystem(data, kernel)
    return system.solve(z, **kw)


# ---------------------------------------------------------------------------
# identity checks against forward solutions

def check_jump_representation(v, lam, lgrid, h_ring=None, kernel=None, n_z=12, seed=0):
    """sup_z |psi(z,lam) - psi+(z,lam) - int c(lam,s) h(s,lam) psi+(z,s) ds| / sup|psi|.

    ``lam`` must be a node of dD on ``lgrid``.  Returns the relative residual.
    """
    from .forward import solve_psi, solve_psi_plus
    from .scatdata import h_volume
    kernel = kernel or RingKernel.build(lgrid)
    nodes = lgrid.ring_nodes
    i = int(np.argmin(np.abs(nodes - lam)))
    if abs(nodes[i] - lam) > 1e-12:
        raise DbarError("lambda must be a node of dD")
    psi = solve_psi(v, nodes[i])
    psip = solve_psi_plus(v, nodes[i])
    if h_ring is None:
        h_col = h_volume(v, psi, nodes)
    else:
        h_col = h_ring[:, i]
    rng = np.random.default_rng(seed)
    g = v.grid
    inside = np.nonzero(np.abs(g.nodes - g.center) <= v.support_radius)
    pick = rng.choice(inside[0].size, size=min(n_z, inside[0].size), replace=False)
    jj, kk = inside[0][pick], inside[1][pick]
    plus_s = np.array([solve_psi_plus(v, s).values[jj, kk] for s in nodes])   # (2N, n_z)
    integral = (kernel.quad[i] * h_col) @ plus_s
    resid = psi.values[jj, kk] - psip.values[jj, kk] - integral
    return float(np.max(np.abs(resid)) / np.max(np.abs(psi.values[jj, kk])))


def manufacture_forward(v, lgrid, points, method="auto"):
    """Scattering data and mu' at spatial points from Lippmann-Schwinger solves.

    Every lambda node is solved once and used both for h (volume formula)
    and for mu'.  Returns (data, zs, plane, ring_minus, ring_exterior):
    plane (n_pts, n_rad, n_theta) holds mu on the plane nodes, ring_minus the
    interior traces mu+ = psi+ phi0(-s) on dD and ring_exterior the traces of
    mu from outside D.  ``zs`` are the grid nodes nearest to ``points``.
    """
    from .forward import solve_mu, solve_psi_plus
    from .scatdata import ScatteringData, h_volume, r_of_lambda, truncate_r
    g = v.grid
    E = v.E
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    flat = np.abs(g.nodes.ravel()[None, :] - pts[:, None]).argmin(axis=1)
    jj, kk = np.unravel_index(flat, g.nodes.shape)
    zs = g.nodes[jj, kk]
    lam = lgrid.plane_nodes
    plane = np.empty((pts.size,) + lam.shape, dtype=complex)
    r = np.zeros(lam.shape, dtype=complex)
    for ij in np.ndindex(lam.shape):
        l = lam[ij]
        mu = solve_mu(v, l, method=method)
        plane[(slice(None),) + ij] = mu.values[jj, kk]
        psi = phi0(g.nodes, l, E) * mu.values
        r[ij] = r_of_lambda(h_volume(v, _Field(psi), -1 / np.conj(l)), l)
    ring = lgrid.ring_nodes
    h_ring = np.zeros((ring.size, ring.size), dtype=complex)
    rin = np.empty((pts.size, ring.size), dtype=complex)
    rout = np.empty((pts.size, ring.size), dtype=complex)
    for i, s in enumerate(ring):
        mu = solve_mu(v, s, method=method)
        rout[:, i] = mu.values[jj, kk]
        h_ring[:, i] = h_volume(v, _Field(phi0(g.nodes, s, E) * mu.values), ring)
        rin[:, i] = solve_psi_plus(v, s, method=method).values[jj, kk] * phi0(zs, -s, E)
    data = ScatteringData(lgrid, E, h_ring, truncate_r(r, lam, lgrid.A), {"path": "volume"})
    return data, zs, plane, rin, rout


@dataclass
class _Field:
    values: np.ndarray


def check_cauchy_pompeiu_assembly(system, z, plane, ring_minus, ring_exterior):
    """Residual of mu' - 1 = T1 mu' + (1/2 pi i) int_{dD} [mu'] ds / (s - lambda).

    [mu'] is the interior minus the exterior trace on dD.  Returns the
    sup-norm residual over plane and ring nodes.
    """
    a_p, a_r = system.T1(z, plane)
    jump = ring_minus - ring_exterior
    c = system.cauchy @ jump
    rp = plane - 1 - a_p - c[:system.P].reshape(system.shape)
    rr = ring_minus - 1 - a_r - c[system.P:]
    return float(max(np.max(np.abs(rp)), np.max(np.abs(rr))))
