"""Grids, field containers, the CGO exponentials and field file I/O."""
import json
import math
from dataclasses import dataclass, field

import numpy as np


class DbarError(Exception):
    """Base class of all library errors."""


class DomainError(DbarError, ValueError):
    """Argument outside the domain of a function (e.g. lambda = 0)."""


class SingularPointError(DomainError):
    """Evaluation at a singular point of a kernel."""


class ExceptionalPointError(DbarError):
    """A discretized integral equation is (numerically) singular."""

    def __init__(self, msg, lam=None, sigma_min=None):
        super().__init__(msg)
        self.lam = lam
        self.sigma_min = sigma_min


class FieldFormatError(DbarError, ValueError):
    """Malformed field file."""


def check_energy(E):
    E = float(E)
    if not (E > 0 and math.isfinite(E)):
        raise DomainError("energy must be positive and finite")
    return E


def phi0(z, lam, E):
    """exp(i sqrt(E)/2 (lambda conj(z) + z/lambda))."""
    lam = np.asarray(lam, dtype=complex)
    if np.any(lam == 0):
        raise DomainError("lambda = 0 is not admissible")
    z = np.asarray(z, dtype=complex)
    return np.exp(0.5j * np.sqrt(E) * (lam * np.conj(z) + z / lam))


def e0(z, lam, E):
    """phi0(z, -lambda) phi0(z, -1/conj(lambda)); unimodular."""
    lam = np.asarray(lam, dtype=complex)
    if np.any(lam == 0):
        raise DomainError("lambda = 0 is not admissible")
    z = np.asarray(z, dtype=complex)
    # the exponent is purely imaginary: -i sqrt(E) Re(z conj(xi)) with xi = lambda + 1/conj(lambda)
    xi = lam + 1 / np.conj(lam)
    return np.exp(-1j * np.sqrt(E) * np.real(np.conj(z) * xi))


@dataclass(frozen=True)
class SpatialGrid:
    """Square grid z_jk = center + h (j - n/2) + i h (k - n/2), h = 2 half_width / n."""
    center: complex
    half_width: float
    n: int

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise DomainError("n must be a power of two >= 8")
        if not self.half_width > 0:
            raise DomainError("half_width must be positive")

    @property
    def h(self):
        return 2.0 * self.half_width / self.n

    @property
    def coords(self):
        return self.h * (np.arange(self.n) - self.n // 2)

    @property
    def nodes(self):
        c = self.coords
        return self.center + c[:, None] + 1j * c[None, :]

    def refine(self):
        return SpatialGrid(self.center, self.half_width, 2 * self.n)

    def difference_grid(self):
        return SpatialGrid(0j, 2 * self.half_width, 2 * self.n)

    def to_dict(self):
        return {"center": [self.center.real, self.center.imag],
                "half_width": self.half_width, "n": self.n}

    @classmethod
    def from_dict(cls, d):
        return cls(complex(*d["center"]), float(d["half_width"]), int(d["n"]))


@dataclass(frozen=True)
class SpatialField:
    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n, self.grid.n):
            raise DomainError("field shape does not match grid")
        if not np.all(np.isfinite(v)):
            raise DomainError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class Potential:
    """Real potential sampled on a grid, with its support radius and energy.

    ``func`` optionally keeps the analytic phantom so that solvers on other
    meshes can sample it exactly.
    """
    field: SpatialField
    support_radius: float
    E: float
    p: float = 2.0
    func: object = None

    def __post_init__(self):
        check_energy(self.E)
        if not self.p > 1:
            raise DomainError("Lebesgue exponent must exceed 1")
        if np.any(self.field.values.imag != 0):
            raise DomainError("potential must be real")
        g = self.field.grid
        if self.support_radius >= g.half_width - g.h:
            raise DomainError("support disk must lie strictly inside the grid square")
        r = np.abs(g.nodes - g.center)
        if np.any(self.field.values[r > self.support_radius] != 0):
            raise DomainError("potential does not vanish outside its support radius")

    @property
    def grid(self):
        return self.field.grid

    @property
    def values(self):
        return self.field.values.real

    def sample(self, z):
        """Potential at arbitrary points (exact when the analytic form is known)."""
        z = np.asarray(z, dtype=complex)
        if self.func is not None:
            return np.where(np.abs(z - self.grid.center) <= self.support_radius,
                            self.func(z), 0.0)
        from scipy.interpolate import RectBivariateSpline
        c = self.grid.coords
        sp = RectBivariateSpline(c, c, self.values, kx=3, ky=3)
        zz = z - self.grid.center
        out = sp.ev(zz.real, zz.imag)
        return np.where(np.abs(zz) <= self.support_radius, out, 0.0)

    def lp_norm(self, p=None):
        p = self.p if p is None else p
        h = self.grid.h
        return float((np.sum(np.abs(self.values) ** p) * h * h) ** (1 / p))


@dataclass(frozen=True)
class Circle:
    """Circle with uniformly spaced nodes; orientation +1 counter-clockwise."""
    center: complex
    radius: float
    n: int
    orientation: int = 1

    @property
    def angles(self):
        return 2 * np.pi * np.arange(self.n) / self.n

    @property
    def nodes(self):
        return self.center + self.radius * np.exp(1j * self.angles)

    @property
    def normals(self):
        return np.exp(1j * self.angles)

    @property
    def dz(self):
        """Weights for contour integrals int f dz along the orientation."""
        return self.orientation * (2 * np.pi / self.n) * 1j * self.radius * np.exp(1j * self.angles)

    @property
    def dl(self):
        return 2 * np.pi * self.radius / self.n


@dataclass(frozen=True)
class BoundaryTrace:
    circle: Circle
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.circle.n,):
            raise DomainError("trace length does not match circle")
        if not np.all(np.isfinite(v)):
            raise DomainError("trace values must be finite")
        object.__setattr__(self, "values", v)


def _gauss_log_radial(a, b, m):
    # Gauss-Legendre nodes in t = ln rho on [ln a, ln b]
    x, w = np.polynomial.legendre.leggauss(m)
    ta, tb = np.log(a), np.log(b)
    t = 0.5 * (tb - ta) * x + 0.5 * (tb + ta)
    return np.exp(t), 0.5 * (tb - ta) * w


@dataclass(frozen=True)
class LambdaGrid:
    """Polar discretization of {1/R_max <= |lambda| <= 1/A} and {A <= |lambda| <= R_max}.

    ``n_plane`` angular nodes on each plane circle and ``n_radial`` Gauss
    nodes in ln|lambda| per annulus; the ring D = {1/A < |lambda| < A} is
    excluded.  ``n_ring`` uniformly spaced nodes on each circle of dD.
    Ring node order: outer circle |lambda| = A (counter-clockwise) first, then
    the inner circle |lambda| = 1/A (clockwise), so D stays on the left.
    """
    A: float
    R_max: float
    n_plane: int
    n_ring: int
    n_radial: int = 0

    def __post_init__(self):
        if not self.A > 1:
            raise DomainError("ring radius A must exceed 1")
        if self.R_max < 2 * self.A:
            raise DomainError("R_max must be at least 2 A")
        if self.n_ring % 2 or self.n_ring < 4:
            raise DomainError("ring node count must be even")
        if self.n_plane < 8:
            raise DomainError("n_plane must be at least 8")
        if self.n_radial == 0:
            object.__setattr__(self, "n_radial", max(8, self.n_plane // 2))

    @property
    def lambda_min(self):
        return 1.0 / self.R_max

    @property
    def radii(self):
        """Radial nodes (inner annulus first) and their weights in ln|lambda|."""
        ro, wo = _gauss_log_radial(self.A, self.R_max, self.n_radial)
        ri = 1.0 / ro[::-1]
        wi = wo[::-1]
        return np.concatenate([ri, ro]), np.concatenate([wi, wo])

    @property
    def angles(self):
        return 2 * np.pi * np.arange(self.n_plane) / self.n_plane

    @property
    def plane_nodes(self):
        """Array (n_rad_total, n_plane) of lambda values."""
        r, _ = self.radii
        return r[:, None] * np.exp(1j * self.angles)[None, :]

    @property
    def plane_weights(self):
        """Area weights d(lambda_R) d(lambda_I) = rho^2 dt dtheta."""
        r, w = self.radii
        return (r ** 2 * w)[:, None] * np.full(self.n_plane, 2 * np.pi / self.n_plane)[None, :]

    @property
    def circles(self):
        return (Circle(0j, self.A, self.n_ring, +1), Circle(0j, 1.0 / self.A, self.n_ring, -1))

    @property
    def ring_nodes(self):
        co, ci = self.circles
        return np.concatenate([co.nodes, ci.nodes])

    @property
    def ring_dz(self):
        co, ci = self.circles
        return np.concatenate([co.dz, ci.dz])


# ---------------------------------------------------------------------------
# field files: one JSON header line, then little-endian float64 (re, im) pairs

def write_field(field_, path, kind="field"):
    header = {"format": "dbar-field", "version": 1, "kind": kind,
              "endianness": "little", "dtype": "float64", "layout": "row-major re,im",
              "grid": field_.grid.to_dict()}
    data = np.empty(field_.values.shape + (2,), dtype="<f8")
    data[..., 0] = field_.values.real
    data[..., 1] = field_.values.imag
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode("utf-8"))
        fh.write(data.tobytes(order="C"))


def read_field(path):
    with open(path, "rb") as fh:
        line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(line.decode("utf-8"))
        grid = SpatialGrid.from_dict(header["grid"])
    except (ValueError, KeyError, TypeError) as exc:
        raise FieldFormatError(f"malformed header: {exc}") from exc
    if header.get("endianness") != "little" or header.get("dtype") != "float64":
        raise FieldFormatError("unsupported encoding")
    expect = grid.n * grid.n * 2 * 8
    if len(payload) != expect:
        raise FieldFormatError(f"payload size {len(payload)} != expected {expect}")
    data = np.frombuffer(payload, dtype="<f8").reshape(grid.n, grid.n, 2)
    if not np.all(np.isfinite(data)):
        raise FieldFormatError("non-finite payload")
    return SpatialField(grid, data[..., 0] + 1j * data[..., 1])
