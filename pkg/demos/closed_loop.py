"""Closed loop: phantom -> DtN data -> scattering data -> d-bar -> potential.

A reduced-size configuration (under half a minute on one core).  The full-size
run is ``dbar-recon run --config`` with the defaults.
"""
import sys
import tempfile

from dbar_recon.cli import run_pipeline

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="dbar_demo_")
cfg = {
    "n": 32, "n_plane": 16, "n_ring": 16, "recon_radius": 1.6,
    "phantom": {"type": "gaussian_bump", "amplitude": 0.5, "width": 0.6, "support_radius": 1.6},
    "output_dir": out,
}
for method in ("pde_quotient", "a1_dbar"):
    rep = run_pipeline(dict(cfg, method=method), start="phantom" if method == "pde_quotient" else "recover")
    print(f"{method:13s} relative L2 error {rep.rel_l2_error:.4f}")
print("artifacts in", out)
