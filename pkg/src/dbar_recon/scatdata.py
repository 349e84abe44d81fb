"""Scattering data h and r, the truncated r', and the exceptional-ring radius."""
import json
from dataclasses import dataclass

import numpy as np

from .core import (DbarError, DomainError, LambdaGrid, check_energy, phi0)
from .forward import (CauchyData, cauchy_data_volume, psi_trace_from_dtn,
                      single_layer_matrix, solve_psi, support_mask)
from .greens import faddeev_g

_NORM = 1.0 / (2 * np.pi) ** 2


def _check_varsigma(s):
    s = np.asarray(s, dtype=complex)
    if np.any(s == 0):
        raise DomainError("varsigma = 0 is not admissible")
    return s


def h_volume(v, psi, varsigma, lam=None):
    """(2 pi)^-2 int phi0(z, -varsigma) v(z) psi(z) dz by the grid trapezoid rule."""
    s = _check_varsigma(varsigma)
    mask = support_mask(v)
    z = v.grid.nodes[mask]
    q = v.grid.h ** 2 * v.values[mask] * psi.values[mask]
    e = phi0(z[None, :], -np.atleast_1d(s)[:, None], v.E)
    out = _NORM * (e @ q)
    return out if s.ndim else complex(out[0])


def h_boundary(cauchy, varsigma, E, L0=None):
    """Boundary pairing of the Cauchy data with phi0(z, -varsigma).

    With ``L0`` None the normal derivative of the exponential is analytic.
    Otherwise it is replaced by the discrete free DtN map, and by the
    symmetry of that map the pairing becomes int e (dpsi/dnu - L0 psi) dl,
    which vanishes identically for v = 0.
    """
    s = np.atleast_1d(_check_varsigma(varsigma))
    c = cauchy.trace.circle
    z = c.nodes
    psi = cauchy.trace.values
    dpsi = cauchy.normal_derivative.values
    e = phi0(z[None, :], -s[:, None], E)
    if L0 is None:
        # grad of exp(-i sqrt(E)/2 (s conj(z) + z/s)) in (x1, x2)
        a1 = -0.5j * np.sqrt(E) * (s + 1 / s)
        a2 = -0.5j * np.sqrt(E) * 1j * (1 / s - s)
        nrm = c.normals
        de = e * (a1[:, None] * nrm.real[None, :] + a2[:, None] * nrm.imag[None, :])
        out = _NORM * c.dl * (e @ dpsi - de @ psi)
    else:
        out = _NORM * c.dl * (e @ (dpsi - L0.matrix @ psi))
    return out if np.ndim(varsigma) else complex(out[0])


def r_of_lambda(h_eval, lam):
    """r(lambda) = sgn(|lambda|^2 - 1) pi / conj(lambda) h(-1/conj(lambda), lambda).

    ``h_eval`` is either the value h(-1/conj(lambda), lambda) or a callable
    h_eval(varsigma, lambda).
    """
    lam = np.asarray(lam, dtype=complex)
    if np.any(lam == 0) or np.any(np.abs(lam) == 1):
        raise DomainError("r is defined only for |lambda| not in {0, 1}")
    h = h_eval(-1 / np.conj(lam), lam) if callable(h_eval) else np.asarray(h_eval, dtype=complex)
    out = np.sign(np.abs(lam) ** 2 - 1) * np.pi / np.conj(lam) * h
    return complex(out) if out.ndim == 0 else out


def truncate_r(r_values, lambdas, A):
    """Zero r inside the ring A^-1 < |lambda| < A."""
    r = np.array(r_values, dtype=complex)
    rho = np.abs(np.asarray(lambdas))
    r[(rho > 1 / A) & (rho < A)] = 0.0
    return r


# ---------------------------------------------------------------------------
# exceptional ring radius

def green_lq_norm(rho, E, radius, q=2.0, n_r=48, n_t=64):
    """(int_{|x| < radius} |g(x, lambda)|^q dx)^(1/q) for |lambda| = rho.

    The norm does not depend on arg(lambda) (rotation of x).  Polar
    quadrature with r = radius u^2 absorbs the logarithmic singularity.
    """
    u, w = np.polynomial.legendre.leggauss(n_r)
    u = 0.5 * (u + 1)
    w = 0.5 * w
    r = radius * u ** 2
    jac = 2 * radius * u * r          # dr = 2 radius u du, area r dr
    t = 2 * np.pi * (np.arange(n_t) + 0.5) / n_t
    x = r[:, None] * np.exp(1j * t)[None, :]
    g = faddeev_g(x, complex(rho), E)
    vals = np.sum(np.abs(g) ** q, axis=1) * (2 * np.pi / n_t)
    return float(np.sum(w * jac * vals) ** (1 / q))


RING_TABLE = np.round(np.concatenate([1.0 + np.geomspace(0.01, 1.0, 40), np.linspace(2.05, 8.0, 120)]), 4)


def ring_bound(v, E, rho, p=2.0):
    """Hoelder bound ||g(., rho)||_{L^q(B)} ||v||_{L^p} of the LS operator in L-infinity."""
    q = p / (p - 1)
    r_diff = 2 * v.support_radius
    return green_lq_norm(rho, E, r_diff, q) * v.lp_norm(p)


def estimate_ring_A(v, E, threshold=0.5, table=RING_TABLE, R_max=None):
    """Smallest tabulated A with the contraction bound below ``threshold``.

    The bound is required at every tabulated radius >= A (up to ``R_max``);
    |lambda| = 1/A gives the same value by the symmetry lambda -> -1/conj(lambda).
    """
    check_energy(E)
    p = v.p
    norm = v.lp_norm(p)
    if norm == 0:
        return float(table[0])
    tab = np.asarray(table)
    if R_max is not None:
        tab = tab[tab <= R_max]
    q = p / (p - 1)
    bounds = np.array([green_lq_norm(rho, E, 2 * v.support_radius, q) for rho in tab]) * norm
    ok = bounds < threshold
    if not ok[-1]:
        raise DbarError("contraction bound not met within the tabulated range; "
                        "increase R_max or reduce the potential")
    bad = np.nonzero(~ok)[0]
    i = 0 if bad.size == 0 else bad[-1] + 1
    return float(tab[i])


# ---------------------------------------------------------------------------
# assembled data

@dataclass
class ScatteringData:
    """h on dD x dD and r' on the plane nodes of a LambdaGrid.

    ``h_ring[j, i] = h(ring_j, ring_i)``: the first index is the exponential
    parameter, the second the spectral parameter of psi.
    """
    lgrid: LambdaGrid
    E: float
    h_ring: np.ndarray
    r_plane: np.ndarray
    diagnostics: dict = None

    @property
    def A(self):
        return self.lgrid.A

    def save(self, path):
        header = {"format": "dbar-scattering", "version": 1, "E": self.E,
                  "A": self.lgrid.A, "R_max": self.lgrid.R_max, "n_plane": self.lgrid.n_plane,
                  "n_ring": self.lgrid.n_ring, "n_radial": self.lgrid.n_radial,
                  "endianness": "little", "blocks": ["h_ring", "r_plane"]}
        with open(path, "wb") as fh:
            fh.write((json.dumps(header) + "\n").encode())
            for arr in (self.h_ring, self.r_plane):
                fh.write(np.ascontiguousarray(arr, dtype="<c16").tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode())
            payload = fh.read()
        lg = LambdaGrid(header["A"], header["R_max"], header["n_plane"], header["n_ring"],
                        header["n_radial"])
        data = np.frombuffer(payload, dtype="<c16")
        nr = 2 * lg.n_ring
        h = data[:nr * nr].reshape(nr, nr).copy()
        r = data[nr * nr:].reshape(lg.plane_nodes.shape).copy()
        return cls(lg, header["E"], h, r)


def _collect(lgrid, E, trace_and_h):
    """Evaluate h on the ring pairs and r' on the plane nodes."""
    ring = lgrid.ring_nodes
    h_ring = np.zeros((ring.size, ring.size), dtype=complex)
    for i, lam in enumerate(ring):
        h_ring[:, i] = trace_and_h(lam, ring)
    lam = lgrid.plane_nodes
    r = np.zeros(lam.shape, dtype=complex)
    for idx in np.ndindex(lam.shape):
        l = lam[idx]
        h = trace_and_h(l, np.array([-1 / np.conj(l)]))[0]
        r[idx] = r_of_lambda(h, l)
    return h_ring, truncate_r(r, lam, lgrid.A)


def scattering_data_dtn(Lv, L0, lgrid, E):
    """Scattering data from DtN matrices: boundary solve for psi, then h."""
    circle = Lv.circle
    D = Lv.matrix - L0.matrix
    zero = not np.any(D)
    residuals = []

    def trace_and_h(lam, svals):
        if zero:
            return np.zeros(len(svals), dtype=complex)
        S = single_layer_matrix(lam, E, circle)
        tr, res = psi_trace_from_dtn(Lv, L0, lam, E, S=S, return_residual=True)
        residuals.append(res)
        cd = CauchyData(tr, type(tr)(circle, Lv.matrix @ tr.values), lam)
        return h_boundary(cd, svals, E, L0=L0)
    h_ring, r = _collect(lgrid, E, trace_and_h)
    diag = {"path": "dtn", "max_boundary_residual": max(residuals, default=0.0)}
    return ScatteringData(lgrid, E, h_ring, r, diag)


def scattering_data_volume(v, lgrid, method="auto"):
    """Scattering data from Lippmann-Schwinger solutions on the grid of v."""
    E = v.E

    def trace_and_h(lam, svals):
        if not np.any(v.values):
            return np.zeros(len(svals), dtype=complex)
        psi = solve_psi(v, lam, method=method)
        return h_volume(v, psi, svals)
    h_ring, r = _collect(lgrid, E, trace_and_h)
    return ScatteringData(lgrid, E, h_ring, r, {"path": "volume"})


def h_pair_closure(v, lam, varsigmas, circle):
    """(h_volume, h_boundary) for the forward solution at lam; Green's identity check."""
    psi = solve_psi(v, lam)
    cd = cauchy_data_volume(v, lam, psi, circle)
    return h_volume(v, psi, varsigmas), h_boundary(cd, varsigmas, v.E)
