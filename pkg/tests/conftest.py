import math

import numpy as np
import pytest

from gicand.camera_model import CameraIntrinsics


@pytest.fixture
def intr640():
    return CameraIntrinsics(fx=300.0, fy=300.0, cx=320.0, cy=320.0, xi=-0.2, alpha=0.6,
                            width=640, height=640, fov_limit=math.radians(95.0))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_dirs_in_cone(rng, n, max_angle):
    """Uniform directions on the sphere cap of half-angle ``max_angle`` around +z."""
    cz = rng.uniform(math.cos(max_angle), 1.0, n)
    phi = rng.uniform(-math.pi, math.pi, n)
    s = np.sqrt(1.0 - cz * cz)
    return np.stack([s * np.cos(phi), s * np.sin(phi), cz], axis=-1)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance lines (criteria run this session) at the end of the output."""
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.LINES):
        terminalreporter.write_line(mod.LINES[num])
