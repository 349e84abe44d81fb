"""Phantoms, configuration, the staged reconstruction pipeline and the command line."""
import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import (Circle, DbarError, LambdaGrid, Potential, SpatialField, SpatialGrid,
                   check_energy, read_field, write_field)

log = logging.getLogger("dbar_recon")

STAGES = ("phantom", "forward", "scattering", "dbar", "recover")


class ConfigError(DbarError, ValueError):
    """Invalid pipeline configuration."""


class StageError(DbarError):
    """A pipeline stage failed; carries the stage name and diagnostics."""

    def __init__(self, stage, msg, diagnostics=None):
        super().__init__(f"stage '{stage}' failed: {msg}")
        self.stage = stage
        self.diagnostics = diagnostics or {}


# ---------------------------------------------------------------------------
# phantoms

def smooth_cutoff(r, R):
    """exp(1 - 1/(1 - (r/R)^2)) inside r < R, zero outside; equals 1 at r = 0."""
    r = np.asarray(r, dtype=float)
    t = np.clip(r / R, 0.0, 1.0 - 1e-15)
    return np.where(r < R, np.exp(1.0 - 1.0 / (1.0 - t * t)), 0.0)


def _phantom_func(spec):
    kind = spec.get("type")
    a = float(spec.get("amplitude", 0.0))
    c = complex(*spec.get("center", (0.0, 0.0)))
    if kind == "gaussian_bump":
        w = float(spec.get("width", 0.6))
        R = float(spec.get("support_radius", 1.6))
        if w <= 0:
            raise ConfigError("gaussian width must be positive")
        return (lambda z: a * np.exp(-np.abs(z - c) ** 2 / w ** 2) * smooth_cutoff(np.abs(z), R)), R
    if kind == "disk_step":
        R = float(spec.get("radius", 0.5))
        return (lambda z: np.where(np.abs(z - c) <= R, a, 0.0)), R + abs(c)
    if kind == "lp_cusp":
        beta = float(spec.get("exponent", 0.5))
        p = float(spec.get("p", 2.0))
        R = float(spec.get("support_radius", 1.0))
        if not 0 < beta < 2 / p:
            raise ConfigError("cusp exponent must lie in (0, 2/p)")
        # sampling safeguard at the singular point; the L^p norm uses the exact profile
        floor = 1e-3 * R

        def f(z):
            r = np.abs(z - c)
            return a * np.maximum(r, floor) ** (-beta) * smooth_cutoff(r, R)
        return f, R + abs(c)
    raise ConfigError(f"unsupported phantom type {kind!r}")


def make_phantom(spec, grid=None, E=1.0):
    """Potential for a phantom spec (dict with 'type' and its parameters).

    gaussian_bump(amplitude, width, center, support_radius): gaussian times a
    smooth radial cutoff.  disk_step(amplitude, radius, center): indicator.
    lp_cusp(amplitude, exponent, p, center, support_radius): |z - c|^-exponent
    times the cutoff; grid values are cell averages, so the sampled field is
    finite while the function lies only in L^p for exponent < 2/p.
    """
    grid = grid or SpatialGrid(0j, 2.0, 64)
    f, R = _phantom_func(spec)
    p = float(spec.get("p", 2.0))
    z = grid.nodes
    if spec["type"] == "lp_cusp":
        m = 8
        off = grid.h * ((np.arange(m) + 0.5) / m - 0.5)
        sub = off[:, None] + 1j * off[None, :]
        vals = np.mean(np.real(f(z[:, :, None, None] + sub[None, None])), axis=(2, 3))
    else:
        vals = np.real(f(z))
    vals = np.where(np.abs(z - grid.center) <= R, vals, 0.0)
    try:
        return Potential(SpatialField(grid, vals), R, check_energy(E), p=p,
                         func=lambda x: np.real(f(x)))
    except DbarError as exc:
        raise ConfigError(str(exc)) from exc


def phantom_lp_norm(spec, p=None):
    """||v||_{L^p} of a phantom by adaptive radial quadrature (about its center)."""
    from scipy.integrate import quad
    p = float(spec.get("p", 2.0)) if p is None else p
    f, _ = _phantom_func(spec)
    c = complex(*spec.get("center", (0.0, 0.0)))
    if spec["type"] == "disk_step":
        R = float(spec.get("radius", 0.5))
        return abs(float(spec.get("amplitude", 0.0))) * (np.pi * R * R) ** (1 / p)
    R = float(spec.get("support_radius", 1.0))
    if abs(c) > 0:
        raise ConfigError("radial quadrature needs a centred phantom")
    a = float(spec.get("amplitude", 0.0))
    if spec["type"] == "lp_cusp":
        # the unclipped profile: weight r^(1 - beta p) handled exactly by QUADPACK
        bp = float(spec.get("exponent", 0.5)) * p
        val, _ = quad(lambda r: 2 * np.pi * abs(a * smooth_cutoff(r, R)) ** p, 0.0, R,
                      weight="alg", wvar=(1.0 - bp, 0.0))
    else:
        val, _ = quad(lambda r: 2 * np.pi * r * abs(f(complex(r))) ** p, 0.0, R, limit=200)
    return val ** (1 / p)


# ---------------------------------------------------------------------------
# configuration

@dataclass
class PipelineConfig:
    E: float = 1.0
    n: int = 64
    half_width: float = 2.0
    n_plane: int = 64
    n_ring: int = 64
    R_max_factor: float = 4.0
    A: float = None
    A_floor: float = 1.5
    phantom: dict = field(default_factory=lambda: {"type": "gaussian_bump", "amplitude": 0.5,
                                                   "width": 0.6, "center": [0.0, 0.0],
                                                   "support_radius": 1.6})
    data_path: str = "dtn"
    method: str = "pde_quotient"
    lambda_factor: float = 3.0
    lambda_angle: float = 0.3
    boundary_radius: float = 1.8
    n_boundary: int = 64
    recon_radius: float = None
    output_dir: str = "dbar_out"
    tolerances: dict = field(default_factory=dict)
    threads: int = None

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    def validate(self):
        def pow2(x, lo):
            return isinstance(x, int) and x >= lo and not x & (x - 1)
        try:
            check_energy(self.E)
        except DbarError as exc:
            raise ConfigError(str(exc)) from exc
        if not pow2(self.n, 8):
            raise ConfigError("n must be a power of two >= 8")
        if not pow2(self.n_plane, 8) or not pow2(self.n_ring, 4) or not pow2(self.n_boundary, 8):
            raise ConfigError("n_plane, n_ring and n_boundary must be powers of two")
        if self.R_max_factor < 2:
            raise ConfigError("R_max_factor must be at least 2")
        if self.A is not None and self.A <= 1:
            raise ConfigError("A must exceed 1")
        if self.A_floor <= 1:
            raise ConfigError("A_floor must exceed 1")
        if self.data_path not in ("dtn", "volume"):
            raise ConfigError("data_path must be 'dtn' or 'volume'")
        if self.method not in ("pde_quotient", "a1_dbar"):
            raise ConfigError("method must be 'pde_quotient' or 'a1_dbar'")
        if self.lambda_factor < 1:
            raise ConfigError("lambda_factor must be at least 1")
        if not isinstance(self.phantom, dict) or "type" not in self.phantom:
            raise ConfigError("phantom must be a dict with a 'type'")
        _, R = _phantom_func(self.phantom)
        h = 2 * self.half_width / self.n
        if not R < self.half_width - h:
            raise ConfigError("phantom support must lie inside the grid")
        if self.data_path == "dtn" and not R < self.boundary_radius:
            raise ConfigError("boundary circle must enclose the phantom support")
        rr = self.reconstruction_radius
        if not rr + 2 * h < self.half_width:
            raise ConfigError("reconstruction disk must lie inside the grid")
        if self.threads is not None and (not isinstance(self.threads, int) or self.threads < 1):
            raise ConfigError("threads must be a positive integer")

    @property
    def reconstruction_radius(self):
        return self.boundary_radius if self.recon_radius is None else float(self.recon_radius)

    @property
    def grid(self):
        return SpatialGrid(0j, float(self.half_width), int(self.n))

    def tol(self, key, default):
        return float(self.tolerances.get(key, default))


# ---------------------------------------------------------------------------
# exports

def export_csv(field_, path):
    """Rows (x, y, re, im) with 17 significant digits, x-index outermost."""
    vals = np.asarray(field_.values, dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise DbarError("cannot export a non-finite field")
    z = field_.grid.nodes
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "re", "im"])
        for zz, vv in zip(z.ravel(), vals.ravel()):
            w.writerow([f"{zz.real:.17g}", f"{zz.imag:.17g}", f"{vv.real:.17g}", f"{vv.imag:.17g}"])


def read_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return data[:, 0] + 1j * data[:, 1], data[:, 2] + 1j * data[:, 3]


def export_pgm(field_, path):
    """Binary 8-bit PGM of |values| scaled linearly by the maximum; y upward."""
    a = np.abs(np.asarray(field_.values))
    if not np.all(np.isfinite(a)):
        raise DbarError("cannot export a non-finite field")
    top = a.max()
    img = np.zeros(a.shape, dtype=np.uint8) if top == 0 else \
        np.round(255 * a / top).astype(np.uint8)
    img = img.T[::-1]           # rows = y from top, columns = x
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())


# ---------------------------------------------------------------------------
# pipeline stages; each reads the artifacts written by the previous one

def _paths(cfg):
    d = cfg.output_dir
    return {k: os.path.join(d, v) for k, v in {
        "config": "config.json", "phantom": "phantom.field", "ring": "ring.json",
        "dtn": "dtn.npz", "scattering": "scattering.bin", "dbar": "dbar.json",
        "a1": "a1.field", "mu": "mu_lambda.field", "v_hat": "v_hat.field",
        "csv": "v_hat.csv", "pgm": "v_hat.pgm", "report": "report.json"}.items()}


def _load_phantom(cfg):
    return make_phantom(cfg.phantom, cfg.grid, cfg.E)


def stage_phantom(cfg):
    from .scatdata import estimate_ring_A
    p = _paths(cfg)
    v = _load_phantom(cfg)
    write_field(v.field, p["phantom"], kind="potential")
    R_max_cert = cfg.R_max_factor * max(cfg.A_floor, cfg.A or 0.0)
    A_cert = estimate_ring_A(v, cfg.E, R_max=R_max_cert)
    A = cfg.A if cfg.A is not None else max(A_cert, cfg.A_floor)
    if A < A_cert:
        raise DbarError(f"configured A = {A} is below the certified radius {A_cert}")
    info = {"A_certified": A_cert, "A": A, "R_max": cfg.R_max_factor * A,
            "lp_norm": v.lp_norm(), "p": v.p}
    with open(p["ring"], "w") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)
    return info


def stage_forward(cfg):
    from .forward import dtn_assemble
    p = _paths(cfg)
    if cfg.data_path != "dtn":
        return {"path": "volume"}
    v = _load_phantom(cfg)
    circle = Circle(0j, cfg.boundary_radius, cfg.n_boundary)
    Lv = dtn_assemble(v, cfg.E, circle)
    L0 = dtn_assemble(None, cfg.E, circle)
    np.savez(p["dtn"], Lv=Lv.matrix, L0=L0.matrix, radius=cfg.boundary_radius,
             n=cfg.n_boundary, E=cfg.E, kind_v=Lv.kind)
    sym = float(np.max(np.abs(Lv.matrix - Lv.matrix.T)) / np.max(np.abs(Lv.matrix)))
    return {"path": "dtn", "dtn_asymmetry": sym}


def stage_scattering(cfg):
    from .forward import DtNMatrix
    from .scatdata import scattering_data_dtn, scattering_data_volume
    p = _paths(cfg)
    with open(p["ring"]) as fh:
        ring = json.load(fh)
    lg = LambdaGrid(ring["A"], ring["R_max"], cfg.n_plane, cfg.n_ring)
    if cfg.data_path == "dtn":
        z = np.load(p["dtn"])
        circle = Circle(0j, float(z["radius"]), int(z["n"]))
        Lv = DtNMatrix(circle, z["Lv"], str(z["kind_v"]), float(z["E"]))
        L0 = DtNMatrix(circle, z["L0"], "L0", float(z["E"]))
        data = scattering_data_dtn(Lv, L0, lg, cfg.E)
    else:
        v = Potential(read_field(p["phantom"]), _phantom_func(cfg.phantom)[1], cfg.E,
                      p=float(cfg.phantom.get("p", 2.0)))
        data = scattering_data_volume(v, lg)
    data.save(p["scattering"])
    return {"max_abs_h": float(np.max(np.abs(data.h_ring), initial=0.0)),
            "max_abs_r": float(np.max(np.abs(data.r_plane), initial=0.0)),
            **(data.diagnostics or {})}


def _lambda_eval(cfg, A):
    w = np.exp(1j * cfg.lambda_angle)
    return cfg.lambda_factor * A * w


def stage_dbar(cfg):
    from .dbar import DbarSystem
    from .recon import dbar_fields
    from .scatdata import ScatteringData
    p = _paths(cfg)
    data = ScatteringData.load(p["scattering"])
    lam = _lambda_eval(cfg, data.A)
    system = DbarSystem(data, extra_radii=[abs(lam)])
    threads = cfg.threads or os.cpu_count() or 1
    mus, a1, _, stats = dbar_fields(system, cfg.grid, cfg.reconstruction_radius, [lam],
                                    tol=cfg.tol("dbar", 1e-11), threads=threads)
    write_field(mus[complex(lam)], p["mu"], kind="mu_prime")
    write_field(a1, p["a1"], kind="a1")
    stats["lambda"] = [lam.real, lam.imag]
    with open(p["dbar"], "w") as fh:
        json.dump(stats, fh, indent=2, sort_keys=True)
    return stats


def stage_recover(cfg):
    from .recon import ReconstructionReport, error_metrics, recover_v_a1, recover_v_quotient
    p = _paths(cfg)
    with open(p["dbar"]) as fh:
        st = json.load(fh)
    lam = complex(*st["lambda"])
    g = cfg.grid
    region = np.abs(g.nodes - g.center) <= cfg.reconstruction_radius
    if cfg.method == "pde_quotient":
        v_hat, info = recover_v_quotient(read_field(p["mu"]), cfg.E, lam, form="mu", region=region)
    else:
        v_hat, info = recover_v_a1(read_field(p["a1"]), cfg.E, region=region)
        lam = None
    truth = read_field(p["phantom"])
    _, R = _phantom_func(cfg.phantom)
    rel_l2, rel_lp, sup = error_metrics(v_hat, truth, R, p=float(cfg.phantom.get("p", 2.0)))
    with open(p["ring"]) as fh:
        ring = json.load(fh)
    diag = {"recovery": info, "dbar": st, "ring": ring, "rel_lp_error": rel_lp, "sup_error": sup}
    rep = ReconstructionReport(v_hat, cfg.method, rel_l2, lam, diag)
    write_field(v_hat, p["v_hat"], kind="potential_estimate")
    export_csv(v_hat, p["csv"])
    export_pgm(v_hat, p["pgm"])
    return rep


_STAGE_FUNCS = {"phantom": stage_phantom, "forward": stage_forward,
                "scattering": stage_scattering, "dbar": stage_dbar, "recover": stage_recover}


def run_pipeline(cfg, start="phantom"):
    """Run the stages from ``start`` on; returns the ReconstructionReport.

    Any failure is re-raised as StageError naming the stage.
    """
    if isinstance(cfg, dict):
        cfg = PipelineConfig.from_dict(cfg)
    if start not in STAGES:
        raise ConfigError(f"unknown stage {start!r}")
    os.makedirs(cfg.output_dir, exist_ok=True)
    with open(_paths(cfg)["config"], "w") as fh:
        json.dump(asdict(cfg), fh, indent=2, sort_keys=True)
    timings = {}
    stage_info = {}
    result = None
    for name in STAGES[STAGES.index(start):]:
        t0 = time.perf_counter()
        try:
            result = _STAGE_FUNCS[name](cfg)
        except StageError:
            raise
        except (DbarError, ArithmeticError, ValueError, OSError, KeyError) as exc:
            raise StageError(name, str(exc), {"exception": type(exc).__name__}) from exc
        timings[name] = time.perf_counter() - t0
        if name != "recover":
            stage_info[name] = result
        log.info("stage %s done in %.1f s", name, timings[name])
    rep = result
    rep.diagnostics["stages"] = stage_info
    rep.save(_paths(cfg)["report"])
    # wall-clock times vary between runs; they are kept out of the report file
    rep.diagnostics["timings"] = timings
    return rep


# ---------------------------------------------------------------------------
# identity checks

def _check_dbar_identity(args):
    from .greens import check_dbar_identity
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for k in range(20):
        rho = (0.3, 3.0)[k % 2]
        lam = rho * np.exp(1j * rng.uniform(0, 2 * np.pi))
        z = rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
        worst = max(worst, check_dbar_identity(z, lam, args.E, 1e-3 * rho))
    return worst, 1e-3


def _check_green_symmetry(args):
    from .greens import faddeev_G
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(20):
        lam = np.exp(rng.uniform(-1.5, 1.5) + 1j * rng.uniform(0, 2 * np.pi))
        z = rng.uniform(-2, 2) + 1j * rng.uniform(-2, 2)
        worst = max(worst, abs(faddeev_G(z, lam, args.E) - faddeev_G(z, -1 / np.conj(lam), args.E)))
    return worst, 1e-5


def _check_green_scaling(args):
    from .greens import faddeev_g
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(20):
        lam = np.exp(rng.uniform(-1.5, 1.5) + 1j * rng.uniform(0, 2 * np.pi))
        z = rng.uniform(-2, 2) + 1j * rng.uniform(-2, 2)
        worst = max(worst, abs(faddeev_g(z, lam, args.E) - faddeev_g(z * np.sqrt(args.E), lam, 1.0)))
    return worst, 1e-6


def _check_dtn_spectrum(args):
    from scipy.special import jv, jvp
    from .forward import dtn_assemble
    c = Circle(0j, 1.0, 32)
    L = dtn_assemble(None, args.E, c).matrix
    k = np.sqrt(args.E)
    worst = 0.0
    for m in range(-8, 9):
        e = np.exp(1j * m * c.angles)
        worst = max(worst, abs((e.conj() @ L @ e) / c.n - k * jvp(abs(m), k) / jv(abs(m), k)))
    return worst, 1e-6


def _check_greens_closure(args):
    from .scatdata import h_pair_closure
    v = make_phantom({"type": "gaussian_bump", "amplitude": 0.5, "width": 0.6,
                      "support_radius": 1.6}, SpatialGrid(0j, 2.0, 32), args.E)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    c = Circle(0j, 1.8, 64)
    for _ in range(4):
        lam = 2.0 * np.exp(1j * rng.uniform(0, 2 * np.pi))
        s = np.exp(rng.uniform(-1, 1, 4) + 1j * rng.uniform(0, 2 * np.pi, 4))
        hv, hb = h_pair_closure(v, lam, s, c)
        worst = max(worst, float(np.max(np.abs(hv - hb)) / np.max(np.abs(hv))))
    return worst, 1e-4


def _check_jump(args):
    from .dbar import check_jump_representation
    v = make_phantom({"type": "gaussian_bump", "amplitude": 0.3, "width": 0.5,
                      "support_radius": 1.2}, SpatialGrid(0j, 2.0, 32), args.E)
    lg = LambdaGrid(1.5, 6.0, 16, 32)
    worst = max(check_jump_representation(v, lg.ring_nodes[i], lg, n_z=6) for i in (0, 40))
    return worst, 1e-2


def _check_integral_equation_residual(args):
    from .dbar import DbarSystem, manufacture_forward
    v = make_phantom({"type": "gaussian_bump", "amplitude": 0.5, "width": 0.6,
                      "support_radius": 1.6}, SpatialGrid(0j, 2.0, 16), args.E)
    lg = LambdaGrid(1.5, 12.0, 16, 16)
    data, zs, plane, rin, _ = manufacture_forward(v, lg, [0.0, 0.5 + 0.25j])
    s = DbarSystem(data)
    worst = max(max(np.max(np.abs(a)) for a in s.residual(z, plane[k], rin[k]))
                for k, z in enumerate(zs))
    return worst, 1e-3


IDENTITIES = {
    "dbar-identity": _check_dbar_identity,
    "green-symmetry": _check_green_symmetry,
    "green-scaling": _check_green_scaling,
    "dtn-spectrum": _check_dtn_spectrum,
    "greens-closure": _check_greens_closure,
    "jump": _check_jump,
    "integral-equation": _check_integral_equation_residual,
}


# ---------------------------------------------------------------------------
# command line

def sweep_lambda(v, radii, n_angles):
    """Smallest singular value of the Lippmann-Schwinger system on a polar lambda grid."""
    from .forward import smallest_singular_value
    rows = []
    for rho in radii:
        for t in 2 * np.pi * np.arange(n_angles) / n_angles:
            lam = rho * np.exp(1j * t)
            rows.append((rho, t, smallest_singular_value(v, lam)))
    return rows


def _build_parser():
    ap = argparse.ArgumentParser(prog="dbar-recon", description="D-bar reconstruction of a "
                                 "two-dimensional Schroedinger potential at fixed energy.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run the reconstruction pipeline")
    r.add_argument("--config", required=True)
    r.add_argument("--from-stage", default="phantom", choices=STAGES)
    c = sub.add_parser("check", help="run one identity checker")
    c.add_argument("identity", choices=sorted(IDENTITIES))
    c.add_argument("--E", type=float, default=1.0)
    c.add_argument("--seed", type=int, default=0)
    s = sub.add_parser("sweep-lambda", help="smallest singular value over a lambda grid")
    s.add_argument("--config")
    s.add_argument("--n", type=int, default=32, help="spatial grid size for the sweep")
    s.add_argument("--radii", type=float, nargs="+", default=[0.5, 0.8, 1.25, 2.0, 3.0])
    s.add_argument("--n-angles", type=int, default=8)
    s.add_argument("--out", help="optional CSV output")
    return ap


def main(argv=None):
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 3 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.cmd == "run":
            cfg = PipelineConfig.from_json(args.config)
            rep = run_pipeline(cfg, args.from_stage)
            print(json.dumps({"method": rep.method, "rel_l2_error": rep.rel_l2_error,
                              "output_dir": cfg.output_dir}))
            return 0
        if args.cmd == "check":
            check_energy(args.E)
            val, thr = IDENTITIES[args.identity](args)
            ok = val < thr
            print(f"{args.identity}: residual {val:.3e} (threshold {thr:.0e}) {'PASS' if ok else 'FAIL'}")
            return 0 if ok else 2
        if args.cmd == "sweep-lambda":
            cfg = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
            if args.n < 8 or args.n & (args.n - 1) or args.n_angles < 1:
                raise ConfigError("n must be a power of two >= 8 and n-angles positive")
            v = make_phantom(cfg.phantom, SpatialGrid(0j, cfg.half_width, args.n), cfg.E)
            rows = sweep_lambda(v, args.radii, args.n_angles)
            print("radius,angle,sigma_min")
            for row in rows:
                print(f"{row[0]:.6g},{row[1]:.6g},{row[2]:.6e}")
            if args.out:
                np.savetxt(args.out, np.array(rows), delimiter=",", header="radius,angle,sigma_min")
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except StageError as exc:
        print(f"{exc} {json.dumps(exc.diagnostics)}", file=sys.stderr)
        return 2
    except DbarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 3


if __name__ == "__main__":
    sys.exit(main())
