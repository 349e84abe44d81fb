"""Forward problem: Lippmann-Schwinger solvers, Dirichlet/DtN maps, single layer.

Volume integrals over the support of v use the trapezoid rule on the spatial
grid with a corrected weight at the logarithmic singularity of the kernel,
applied as a linear convolution through FFTs of a (2n, 2n) kernel table.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg as spla

from ._bessel import bessel_j0
from .core import (BoundaryTrace, Circle, DomainError, ExceptionalPointError,
                   SpatialField, phi0)
from .greens import (build_faddeev_table, build_gplus_table, faddeev_G,
                     faddeev_G_regular, gplus, gplus_regular)

COND_LIMIT = 1e12


@dataclass(frozen=True)
class DtNMatrix:
    """Nodal Dirichlet-to-Neumann matrix on a circle."""
    circle: Circle
    matrix: np.ndarray
    kind: str
    E: float


@dataclass(frozen=True)
class CauchyData:
    trace: BoundaryTrace
    normal_derivative: BoundaryTrace
    lam: complex


@dataclass
class SolveInfo:
    method: str
    iterations: int = 0
    residual: float = 0.0
    contraction: float = float("nan")
    sigma_min: float = float("nan")


# ---------------------------------------------------------------------------
# Lippmann-Schwinger equations

def support_mask(v):
    g = v.grid
    return np.abs(g.nodes - g.center) <= v.support_radius


class _Convolution:
    """Linear convolution with a kernel table, restricted to the support."""

    def __init__(self, table, grid, vals, mask):
        self.n = grid.n
        self.wfft = table.fft()
        self.weights = table.weights
        self.vals = vals
        self.mask = mask
        self.idx = np.nonzero(mask)

    def full(self, f):
        n = self.n
        pad = np.zeros((2 * n, 2 * n), dtype=complex)
        pad[:n, :n] = f
        return np.fft.ifft2(self.wfft * np.fft.fft2(pad))[:n, :n]

    def apply_support(self, x):
        f = np.zeros((self.n, self.n), dtype=complex)
        f[self.idx] = self.vals[self.idx] * x
        return self.full(f)[self.idx]

    def dense(self):
        a, b = self.idx
        n2 = 2 * self.n
        K = self.weights[(a[:, None] - a[None, :]) % n2, (b[:, None] - b[None, :]) % n2]
        return K * self.vals[self.idx][None, :]


def _solve_second_kind(conv, rhs, method, tol, lam, maxiter=500):
    """Solve x - conv(v x) = rhs on the support."""
    m = rhs.size
    info = SolveInfo(method)
    if m == 0:
        return rhs.copy(), info
    if method == "auto":
        method = "dense" if conv.n < 64 else "gmres"
        info.method = method
    if method == "dense":
        M = np.eye(m) - conv.dense()
        x = None
        rcond = 0.0
        try:
            lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
            rcond = scipy.linalg.lapack.zgecon(lu, np.linalg.norm(M, 1), norm="1")[0]
            x = scipy.linalg.lu_solve((lu, piv), rhs)
        except (np.linalg.LinAlgError, ValueError):
            pass
        if x is None or not np.all(np.isfinite(x)) or rcond < 1.0 / COND_LIMIT:
            s = np.linalg.svd(M, compute_uv=False)
            raise ExceptionalPointError("Lippmann-Schwinger system is singular",
                                        lam, float(s[-1]))
        info.residual = float(np.linalg.norm(M @ x - rhs) / np.linalg.norm(rhs))
        return x, info
    if method == "picard":
        x = rhs.copy()
        prev = None
        ratios = []
        for it in range(maxiter):
            xn = rhs + conv.apply_support(x)
            d = np.max(np.abs(xn - x))
            if prev is not None and prev > 0:
                ratios.append(d / prev)
            x = xn
            prev = d
            if d <= tol * np.max(np.abs(x)):
                break
        info.iterations = it + 1
        info.contraction = float(np.median(ratios[-5:])) if ratios else 0.0
        info.residual = float(prev / np.max(np.abs(x)))
        if not info.residual <= tol:
            raise ExceptionalPointError("Picard iteration did not converge", lam)
        return x, info
    A = spla.LinearOperator((m, m), matvec=lambda x: x - conv.apply_support(x), dtype=complex)
    count = [0]

    def cb(_):
        count[0] += 1
    x, flag = spla.gmres(A, rhs, rtol=tol, atol=0.0, restart=min(m, 80), maxiter=maxiter,
                         callback=cb, callback_type="pr_norm")
    res = np.linalg.norm(A.matvec(x) - rhs) / np.linalg.norm(rhs)
    info.iterations = count[0]
    info.residual = float(res)
    if flag != 0 or not np.isfinite(res) or res > 1e3 * tol:
        raise ExceptionalPointError(f"GMRES failed (flag {flag}, residual {res:.2e})", lam)
    return x, info


def solve_mu(v, lam, table=None, method="auto", tol=1e-12, return_info=False):
    """Solve mu = 1 + g * (v mu) on the grid of the potential."""
    lam = complex(lam)
    grid = v.grid
    if not np.any(v.values):
        mu = SpatialField(grid, np.ones((grid.n, grid.n)))
        return (mu, SolveInfo("trivial")) if return_info else mu
    if table is None:
        table = build_faddeev_table(lam, v.E, grid)
    mask = support_mask(v)
    conv = _Convolution(table, grid, v.values.astype(complex), mask)
    x, info = _solve_second_kind(conv, np.ones(int(mask.sum()), dtype=complex), method, tol, lam)
    f = np.zeros((grid.n, grid.n), dtype=complex)
    f[mask] = v.values[mask] * x
    mu = 1.0 + conv.full(f)
    mu[mask] = x
    out = SpatialField(grid, mu)
    return (out, info) if return_info else out


def solve_psi(v, lam, table=None, method="auto", tol=1e-12):
    """Faddeev solution psi = phi0 mu."""
    mu = solve_mu(v, lam, table, method, tol)
    return SpatialField(v.grid, phi0(v.grid.nodes, lam, v.E) * mu.values)


def solve_psi_plus(v, lam, table=None, method="auto", tol=1e-12, return_info=False):
    """Solve psi+ = phi0 + G+ * (v psi+) on the grid of the potential."""
    lam = complex(lam)
    if lam == 0:
        raise DomainError("lambda = 0 is not admissible")
    grid = v.grid
    inc = phi0(grid.nodes, lam, v.E)
    if not np.any(v.values):
        out = SpatialField(grid, inc)
        return (out, SolveInfo("trivial")) if return_info else out
    if table is None:
        table = build_gplus_table(v.E, grid)
    mask = support_mask(v)
    conv = _Convolution(table, grid, v.values.astype(complex), mask)
    x, info = _solve_second_kind(conv, inc[mask], method, tol, lam)
    f = np.zeros((grid.n, grid.n), dtype=complex)
    f[mask] = v.values[mask] * x
    psi = inc + conv.full(f)
    psi[mask] = x
    out = SpatialField(grid, psi)
    return (out, info) if return_info else out


def ls_operator_norm_proxy(v, lam, table=None):
    """Discrete L-infinity norm of the operator mu -> g * (v mu) on the support."""
    if table is None:
        table = build_faddeev_table(lam, v.E, v.grid)
    mask = support_mask(v)
    conv = _Convolution(table, v.grid, v.values.astype(complex), mask)
    return float(np.max(np.sum(np.abs(conv.dense()), axis=1)))


def smallest_singular_value(v, lam, table=None):
    """Smallest singular value of the discretized Lippmann-Schwinger system."""
    if table is None:
        table = build_faddeev_table(lam, v.E, v.grid)
    mask = support_mask(v)
    conv = _Convolution(table, v.grid, v.values.astype(complex), mask)
    M = np.eye(int(mask.sum())) - conv.dense()
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def volume_potential(v, lam, psi, points, kind="faddeev", grad=False):
    """psi(z) at points away from the support, from the grid solution.

    Returns phi0(z) + h^2 sum_j K(z - z_j) v_j psi_j, K = G (Faddeev) or G+;
    with grad=True also the x1 and x2 derivatives.
    """
    points = np.asarray(points, dtype=complex)
    grid = v.grid
    mask = support_mask(v)
    zs = grid.nodes[mask]
    q = grid.h ** 2 * v.values[mask] * psi.values[mask]
    E = v.E
    d = points[:, None] - zs[None, :]
    inc = phi0(points, lam, E)
    ik1, ik2 = _ik(lam, E)
    if kind == "faddeev":
        if grad:
            G, Gx, Gy = faddeev_G(d, lam, E, grad=True)
        else:
            G = faddeev_G(d, lam, E)
    else:
        G = gplus(d, E)
        if grad:
            r = np.abs(d)
            from ._bessel import bessel_j0y0j1y1
            j0, y0, j1, y1 = bessel_j0y0j1y1(np.sqrt(E) * r)
            dG = 0.25j * np.sqrt(E) * (j1 + 1j * y1)
            Gx, Gy = dG * d.real / r, dG * d.imag / r
    val = inc + G @ q
    if not grad:
        return val
    return val, ik1 * inc + Gx @ q, ik2 * inc + Gy @ q


def _ik(lam, E):
    lam = complex(lam)
    s = np.sqrt(E)
    return 0.5j * s * (lam + 1 / lam), 0.5j * 1j * s * (1 / lam - lam)


def cauchy_data_volume(v, lam, psi, circle, kind="faddeev"):
    """Trace and outward normal derivative of a grid solution on a circle."""
    z = circle.nodes
    val, dx, dy = volume_potential(v, lam, psi, z, kind=kind, grad=True)
    nrm = circle.normals
    dn = dx * nrm.real + dy * nrm.imag
    return CauchyData(BoundaryTrace(circle, val), BoundaryTrace(circle, dn), complex(lam))


# ---------------------------------------------------------------------------
# Dirichlet problem on a disk: u = B u0 + Lap^{-1} g,  g + (E - v) Lap^{-1} g = (v - E) B u0

class PolarDirichlet:
    """Fourier-in-angle, second-order finite differences in radius, on a disk.

    Radial nodes r_i = i dr, i = 0..n_r, with r_{n_r} = radius.
    """

    def __init__(self, E, center, radius, n_theta, n_r, vfunc=None):
        self.E = float(E)
        self.center = complex(center)
        self.R = float(radius)
        self.nt = int(n_theta)
        self.nr = int(n_r)
        self.dr = self.R / self.nr
        self.r = self.dr * np.arange(self.nr + 1)
        self.theta = 2 * np.pi * np.arange(self.nt) / self.nt
        self.modes = np.fft.fftfreq(self.nt, 1.0 / self.nt).astype(int)
        pts = self.center + self.r[:, None] * np.exp(1j * self.theta)[None, :]
        self.v = np.zeros(pts.shape) if vfunc is None else np.real(vfunc(pts))
        self.has_v = bool(np.any(self.v))
        self._lap = self._factor(0.0)
        self._helm = self._factor(self.E)

    def _mode_matrix(self, n, shift):
        # unknowns w_0..w_{nr-1}; w_nr = 0
        m = self.nr
        dr = self.dr
        i = np.arange(m, dtype=float)
        main = np.zeros(m)
        up = np.zeros(m - 1)
        lo = np.zeros(m - 1)
        ri = i[1:] * dr
        rp = (i[1:] + 0.5) * dr
        rm = (i[1:] - 0.5) * dr
        main[1:] = -(rp + rm) / (ri * dr * dr) - n * n / ri ** 2 + shift
        up[1:] = rp[:-1] / (ri[:-1] * dr * dr)
        lo[:] = rm / (ri * dr * dr)
        if n == 0:
            main[0] = -4.0 / dr ** 2 + shift
            up[0] = 4.0 / dr ** 2
        else:
            main[0] = 1.0
            up[0] = 0.0
            lo[0] = 0.0
        return scipy.sparse.diags([lo, main, up], [-1, 0, 1], format="csc")

    def _factor(self, shift):
        blocks = [self._mode_matrix(abs(n), shift) for n in self.modes]
        M = scipy.sparse.block_diag(blocks, format="csc")
        return spla.splu(M)

    def _solve_modes(self, lu, gh, zero_center):
        # gh: (nr+1, nt) Fourier coefficients in angle; returns (nr+1, nt)
        rhs = gh[:-1, :].T.copy()       # (nt, nr)
        rhs[zero_center, 0] = 0.0
        b = rhs.ravel()
        w = lu.solve(b.real.copy()) + 1j * lu.solve(b.imag.copy())
        out = np.zeros_like(gh)
        out[:-1, :] = w.reshape(self.nt, self.nr).T
        return out

    def lap_inv_hat(self, gh):
        return self._solve_modes(self._lap, gh, self.modes != 0)

    def helm_inv_hat(self, gh):
        return self._solve_modes(self._helm, gh, self.modes != 0)

    def harmonic_hat(self, u0hat):
        rr = self.r[:, None] / self.R
        return u0hat[None, :] * rr ** np.abs(self.modes)[None, :]

    def _to_hat(self, f):
        return np.fft.fft(f, axis=1) / self.nt

    def _from_hat(self, fh):
        return np.fft.ifft(fh, axis=1) * self.nt

    def solve_g(self, u0hat, tol=1e-13):
        """Solve (dir5) for g; returns (g_hat, Bu0 values)."""
        Bu0 = self._from_hat(self.harmonic_hat(u0hat))
        f = (self.v - self.E) * Bu0
        # v = 0 part of the operator, I + E Lap^{-1}, is inverted exactly per mode:
        # (I + E Lap^{-1})^{-1} = (Lap + E)^{-1} Lap applied to the FD operator
        fh = self._to_hat(f)
        if not self.has_v:
            return self._precond(fh), Bu0
        shape = fh.shape

        def op(x):
            gh = x.reshape(shape)
            w = self._from_hat(self.lap_inv_hat(gh))
            return (gh + self._to_hat((self.E - self.v) * w)).ravel()

        def prec(x):
            return self._precond(x.reshape(shape)).ravel()
        N = fh.size
        A = spla.LinearOperator((N, N), matvec=op, dtype=complex)
        P = spla.LinearOperator((N, N), matvec=prec, dtype=complex)
        x, flag = spla.gmres(A, fh.ravel(), M=P, rtol=tol, atol=0.0, restart=60, maxiter=200)
        if flag != 0:
            raise ExceptionalPointError("Dirichlet Fredholm system did not converge "
                                        "(E close to a Dirichlet eigenvalue?)")
        return x.reshape(shape), Bu0

    def _precond(self, gh):
        # (I + E Lap^{-1})^{-1} gh = Lap (Lap + E)^{-1} gh, using the FD identity
        # Lap (Lap + E)^{-1} = I - E (Lap + E)^{-1}
        return gh - self.E * self.helm_inv_hat(gh)

    def normal_derivative_hat(self, u0hat, gh):
        """Fourier coefficients of du/dr at the boundary."""
        n = np.abs(self.modes)
        rr = self.r / self.R
        wts = np.full(self.nr + 1, self.dr)
        wts[0] = wts[-1] = 0.5 * self.dr
        kern = (rr[:, None] ** n[None, :]) * self.r[:, None] * wts[:, None] / self.R
        return n / self.R * u0hat + np.sum(kern * gh, axis=0)

    def solve(self, u0hat, tol=1e-13):
        """Return (u on the polar grid, boundary normal derivative coefficients)."""
        gh, Bu0 = self.solve_g(u0hat, tol)
        u = Bu0 + self._from_hat(self.lap_inv_hat(gh))
        return u, self.normal_derivative_hat(u0hat, gh)

    def eigen_check(self):
        """Smallest |eigenvalue| proxy of the v = 0 Helmholtz FD operator per mode."""
        return min(abs(self._helm.U.diagonal()).min(), np.inf)


def _dtn_modal(E, center, radius, n_b, n_theta, n_r, vfunc):
    solver = PolarDirichlet(E, center, radius, n_theta, n_r, vfunc)
    modes_b = np.fft.fftfreq(n_b, 1.0 / n_b).astype(int)
    M = np.zeros((n_b, n_b), dtype=complex)
    pos = {m: i for i, m in enumerate(solver.modes)}
    for j, m in enumerate(modes_b):
        u0hat = np.zeros(solver.nt, dtype=complex)
        u0hat[pos[m]] = 1.0
        _, dn = solver.solve(u0hat)
        M[:, j] = dn[[pos[k] for k in modes_b]]
    return M


def dtn_assemble(v, E, circle, n_r=None, n_theta=None, levels=3):
    """Dirichlet-to-Neumann matrix in the nodal basis of ``circle``.

    The radial finite-difference error is removed by Richardson extrapolation
    over ``levels`` successive halvings of the radial step.
    """
    n_b = circle.n
    if n_theta is None:
        n_theta = max(n_b, 64)
    if n_r is None:
        n_r = 256
    vfunc = None
    kind = "L0"
    if v is not None and np.any(v.values):
        vfunc = v.sample
        kind = "Lv"
        if circle.radius <= v.support_radius + 1e-12 + abs(circle.center - v.grid.center):
            raise DomainError("the circle must enclose the support of v")
    ests = [_dtn_modal(E, circle.center, circle.radius, n_b, n_theta, n_r * 2 ** l, vfunc)
            for l in range(levels)]
    # Richardson table for an error expansion in dr^2, dr^4, ...
    for k in range(1, levels):
        f = 4.0 ** k
        ests = [(f * ests[i + 1] - ests[i]) / (f - 1) for i in range(len(ests) - 1)]
    modal = ests[0]
    F = np.exp(-1j * np.outer(np.fft.fftfreq(n_b, 1.0 / n_b), circle.angles)) / n_b
    Finv = np.exp(1j * np.outer(circle.angles, np.fft.fftfreq(n_b, 1.0 / n_b)))
    return DtNMatrix(circle, Finv @ modal @ F, kind, float(E))


def dirichlet_solve(v, E, u0, grid=None, n_r=512, n_theta=None):
    """Solve (Delta + E - v) u = 0 in the disk of u0's circle with u = u0.

    Returns a SpatialField on ``grid`` (default: the potential's grid) holding
    u at nodes inside the disk and zero outside.
    """
    circle = u0.circle
    if n_theta is None:
        n_theta = max(circle.n, 64)
    vfunc = None if v is None or not np.any(v.values) else v.sample
    solver = PolarDirichlet(E, circle.center, circle.radius, n_theta, n_r, vfunc)
    u0hat_b = np.fft.fft(u0.values) / circle.n
    u0hat = np.zeros(n_theta, dtype=complex)
    mb = np.fft.fftfreq(circle.n, 1.0 / circle.n).astype(int)
    u0hat[mb % n_theta] = u0hat_b
    u, _ = solver.solve(u0hat)
    if grid is None:
        grid = v.grid
    return SpatialField(grid, polar_to_grid(solver, u, grid))


def polar_to_grid(solver, u, grid):
    """Interpolate a polar-grid field to the Cartesian nodes inside the disk."""
    from scipy.interpolate import CubicSpline
    z = grid.nodes - solver.center
    inside = np.abs(z) <= solver.R
    uh = np.fft.fft(u, axis=1) / solver.nt
    rq = np.abs(z[inside])
    tq = np.angle(z[inside])
    vals = np.zeros(rq.shape, dtype=complex)
    for j, m in enumerate(solver.modes):
        col = uh[:, j]
        if not np.any(np.abs(col) > 1e-300):
            continue
        # u_m(r) ~ r^|m| near 0: interpolate u_m(r) r^-min(|m|,2)-free by spline of u_m
        cs = CubicSpline(solver.r, col)
        vals += cs(rq) * np.exp(1j * m * tq)
    out = np.zeros(grid.nodes.shape, dtype=complex)
    out[inside] = vals
    return out


# ---------------------------------------------------------------------------
# single layer and the boundary equation for psi

def _kress_log_weights(N):
    # R[i, j] for int_0^{2pi} ln(4 sin^2((t_i - s)/2)) f(s) ds
    t = 2 * np.pi * np.arange(N) / N
    d = t[:, None] - t[None, :]
    m = np.arange(1, N // 2)
    R = -(4 * np.pi / N) * np.sum(np.cos(m[None, None, :] * d[..., None]) / m, axis=-1)
    R -= (4 * np.pi / N ** 2) * np.cos(0.5 * N * d)
    return R


def single_layer_matrix(lam, E, circle, kernel="faddeev"):
    """Matrix of (S phi)(z_i) = int G(z_i - z', k(lambda)) phi(z') dl_{z'}."""
    N = circle.n
    z = circle.nodes
    d = z[:, None] - z[None, :]
    off = ~np.eye(N, dtype=bool)
    G = np.zeros((N, N), dtype=complex)
    if kernel == "faddeev":
        G[off] = faddeev_G(d[off], lam, E)
        reg = faddeev_G_regular(lam, E)
    elif kernel == "plus":
        G[off] = gplus(d[off], E)
        reg = gplus_regular(E)
    else:
        raise DomainError(f"unknown kernel {kernel!r}")
    t = circle.angles
    ls = np.zeros((N, N))
    ls[off] = np.log(4 * np.sin(0.5 * (t[:, None] - t[None, :])[off]) ** 2)
    J = bessel_j0(np.sqrt(E) * np.abs(d))
    smooth = G - J * ls / (4 * np.pi)
    smooth[~off] = reg + np.log(circle.radius) / (2 * np.pi)
    R = _kress_log_weights(N)
    return circle.radius * (R * J / (4 * np.pi) + (2 * np.pi / N) * smooth)


def single_layer_S(lam, E, circle, density, kernel="faddeev"):
    """Apply the single layer operator to a density on the circle."""
    vals = np.asarray(density.values, dtype=complex)
    if not np.any(vals):
        return BoundaryTrace(circle, np.zeros(circle.n, dtype=complex))
    return BoundaryTrace(circle, single_layer_matrix(lam, E, circle, kernel) @ vals)


def psi_trace_from_dtn(Lv, L0, lam, E, S=None, return_residual=False):
    """Boundary values of psi from (I - S_lambda (Lv - L0)) psi = phi0."""
    circle = Lv.circle
    inc = phi0(circle.nodes, lam, E)
    D = Lv.matrix - L0.matrix
    if not np.any(D):
        out = BoundaryTrace(circle, inc)
        return (out, 0.0) if return_residual else out
    if S is None:
        S = single_layer_matrix(lam, E, circle)
    M = np.eye(circle.n) - S @ D
    if np.linalg.cond(M) > COND_LIMIT:
        raise ExceptionalPointError("boundary system is singular", complex(lam))
    x = np.linalg.solve(M, inc)
    res = float(np.linalg.norm(M @ x - inc) / np.linalg.norm(inc))
    out = BoundaryTrace(circle, x)
    return (out, res) if return_residual else out
