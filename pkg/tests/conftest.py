import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from dbar_recon.cli import make_phantom  # noqa: E402
from dbar_recon.core import SpatialGrid  # noqa: E402


def bump(n=32, amplitude=0.5, width=0.6, radius=1.6, half_width=2.0, E=1.0, center=(0.0, 0.0)):
    spec = {"type": "gaussian_bump", "amplitude": amplitude, "width": width,
            "support_radius": radius, "center": list(center)}
    return make_phantom(spec, SpatialGrid(0j, half_width, n), E)


@pytest.fixture
def small_bump():
    return bump(32)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        ok, msg = RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {msg}")
