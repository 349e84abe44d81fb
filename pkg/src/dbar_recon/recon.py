"""Recovery of the potential from solved spectral fields, and error metrics."""
import json
from dataclasses import dataclass, field

import numpy as np

from .core import DbarError, DomainError, SpatialField

QUOTIENT_FLOOR = 1e-3
MAX_MASKED = 0.05


class UnstableQuotientError(DbarError):
    """Too many nodes with a vanishing denominator in the quotient formula."""


def _laplacian(f, h):
    out = np.full(f.shape, np.nan, dtype=complex)
    out[1:-1, 1:-1] = (f[2:, 1:-1] + f[:-2, 1:-1] + f[1:-1, 2:] + f[1:-1, :-2]
                       - 4 * f[1:-1, 1:-1]) / h ** 2
    return out


def _wirtinger(f, h):
    """Central-difference (d_z, d_zbar) = ((dx - i dy)/2, (dx + i dy)/2)."""
    dx = np.full(f.shape, np.nan, dtype=complex)
    dy = np.full(f.shape, np.nan, dtype=complex)
    dx[1:-1, :] = (f[2:, :] - f[:-2, :]) / (2 * h)
    dy[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / (2 * h)
    return 0.5 * (dx - 1j * dy), 0.5 * (dx + 1j * dy)


def _fill_masked(vals, bad):
    """Replace masked nodes by the average of their unmasked neighbours."""
    out = vals.copy()
    for j, k in zip(*np.nonzero(bad)):
        nb = [(j + a, k + b) for a, b in ((1, 0), (-1, 0), (0, 1), (0, -1))
              if 0 <= j + a < vals.shape[0] and 0 <= k + b < vals.shape[1] and not bad[j + a, k + b]]
        out[j, k] = np.mean([vals[p] for p in nb]) if nb else 0.0
    return out


def recover_v_quotient(u, E, lam=None, form="psi", region=None, floor=QUOTIENT_FLOOR):
    """v = Delta u / u + E from a solution u of the Schroedinger equation.

    ``form='psi'``: u is psi and the five-point Laplacian is used.
    ``form='mu'``: u holds mu = psi phi0(., -lam) and
    v = (Delta mu + 2 i sqrt(E) (lam d_z mu + d_zbar mu / lam)) / mu, which
    avoids differencing the exponential factor.
    ``region`` is a boolean mask of nodes where v is wanted (default: all
    interior nodes); values elsewhere are zero.  Returns (field, info).
    """
    f = np.asarray(u.values, dtype=complex)
    h = u.grid.h
    n = u.grid.n
    if region is None:
        region = np.zeros((n, n), dtype=bool)
        region[1:-1, 1:-1] = True
    region = region.copy()
    region[[0, -1], :] = False
    region[:, [0, -1]] = False
    if form == "psi":
        q = _laplacian(f, h) / f + E
    elif form == "mu":
        if lam is None:
            raise DomainError("the mu form needs lambda")
        dz, dzb = _wirtinger(f, h)
        q = (_laplacian(f, h) + 2j * np.sqrt(E) * (lam * dz + dzb / lam)) / f
    else:
        raise DomainError(f"unknown form {form!r}")
    scale = np.max(np.abs(f[region])) if np.any(region) else 1.0
    bad = region & (np.abs(f) < floor * scale)
    if np.any(region) and bad.sum() > MAX_MASKED * region.sum():
        raise UnstableQuotientError(f"{bad.sum()} of {region.sum()} nodes masked; use a larger |lambda|")
    q = np.where(region, q, 0.0)
    if np.any(bad):
        q = _fill_masked(q, bad)
    info = {"masked": int(bad.sum()), "max_imag": float(np.max(np.abs(q.imag[region]), initial=0.0))}
    return SpatialField(u.grid, q.real), info


def recover_v_a1(a1, E, region=None):
    """v = 2 i sqrt(E) d_z a1 for a1 the 1/lambda coefficient of mu' at infinity.

    Returns (field, info) with the discarded imaginary residue in info.
    """
    f = np.asarray(a1.values, dtype=complex)
    n = a1.grid.n
    if not np.all(np.isfinite(f)):
        raise DbarError("non-finite a1")
    if region is None:
        region = np.zeros((n, n), dtype=bool)
        region[1:-1, 1:-1] = True
    region = region.copy()
    region[[0, -1], :] = False
    region[:, [0, -1]] = False
    dz, _ = _wirtinger(f, a1.grid.h)
    q = np.where(region, 2j * np.sqrt(E) * dz, 0.0)
    info = {"max_imag": float(np.max(np.abs(q.imag[region]), initial=0.0))}
    return SpatialField(a1.grid, q.real), info


def error_metrics(v_hat, v_true, radius=None, p=2.0):
    """(rel_l2, rel_lp, sup_abs) over the disk of ``radius`` about the grid center.

    For a zero truth the absolute norms are returned.
    """
    if v_hat.grid != v_true.grid:
        raise DomainError("fields live on different grids")
    g = v_true.grid
    m = np.ones((g.n, g.n), dtype=bool) if radius is None else np.abs(g.nodes - g.center) <= radius
    d = np.abs(v_hat.values - v_true.values)[m]
    t = np.abs(v_true.values)[m]

    def rel(a, b, q):
        na = np.sum(a ** q) ** (1 / q)
        nb = np.sum(b ** q) ** (1 / q)
        return float(na / nb) if nb > 0 else float(na * g.h ** (2 / q))
    return rel(d, t, 2.0), rel(d, t, p), float(np.max(d, initial=0.0))


@dataclass
class ReconstructionReport:
    v_hat: SpatialField
    method: str
    rel_l2_error: float = None
    lambda_used: complex = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        lam = None if self.lambda_used is None else [self.lambda_used.real, self.lambda_used.imag]
        return {"method": self.method, "rel_l2_error": self.rel_l2_error,
                "lambda_used": lam, "diagnostics": _jsonable(self.diagnostics)}

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def dbar_fields(system, grid, radius, lam_eval=(), center=0j, tol=1e-11, threads=1):
    """Solve for mu'(z, .) at every grid node within ``radius`` (plus one layer).

    Returns (mu_at_lam: dict lam -> SpatialField, a1: SpatialField, region,
    stats).  Outside the solved nodes mu' = 1 and a1 = 0.  Each node is an
    independent solve, so results do not depend on ``threads``.
    """
    n = grid.n
    dist = np.abs(grid.nodes - center)
    region = dist <= radius
    jj, kk = np.nonzero(dist <= radius + 1.5 * grid.h)
    lams = [complex(l) for l in lam_eval]

    def one(idx):
        sol = system.solve(grid.nodes[jj[idx], kk[idx]], tol=tol)
        vals = system.evaluate(sol, lams) if lams else np.empty(0, dtype=complex)
        return vals, system.a1(sol), sol.info["iterations"], sol.info["residual"]
    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as pool:
            out = list(pool.map(one, range(jj.size)))
    else:
        out = [one(i) for i in range(jj.size)]
    mus = {l: np.ones((n, n), dtype=complex) for l in lams}
    a1 = np.zeros((n, n), dtype=complex)
    for i, (vals, a, _, _) in enumerate(out):
        for l, val in zip(lams, vals):
            mus[l][jj[i], kk[i]] = val
        a1[jj[i], kk[i]] = a
    stats = {"n_solves": int(jj.size), "max_iterations": max((o[2] for o in out), default=0),
             "max_residual": max((o[3] for o in out), default=0.0)}
    return ({l: SpatialField(grid, m) for l, m in mus.items()}, SpatialField(grid, a1),
            region, stats)
