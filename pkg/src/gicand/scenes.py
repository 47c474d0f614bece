"""Built-in camera layouts and the demo scene suite."""
from __future__ import annotations

import math

from .camera_model import CameraIntrinsics
from .rig import Rig, polygon_rig
from .synth import Box, Checker, Plane, Scene, Sinusoid, Sphere

D_MIN, D_MAX = 0.5, 100.0


def default_intrinsics(size: int = 512) -> CameraIntrinsics:
    """Upward fisheye whose 95 degree rim sits just inside a square image."""
    f = 125.0 * size / 512
    c = (size - 1) / 2.0
    return CameraIntrinsics(fx=f, fy=f, cx=c, cy=c, xi=-0.2, alpha=0.6,
                            width=size, height=size, fov_limit=math.radians(95.0))


def training_rig(intr: CameraIntrinsics = None) -> Rig:
    """Three cameras on a 0.3 m triangle, reference at the centroid."""
    return polygon_rig(intr or default_intrinsics(), 3, 0.3)


def wide_rig(intr: CameraIntrinsics = None) -> Rig:
    """Three cameras on a 1 m triangle."""
    return polygon_rig(intr or default_intrinsics(), 3, 1.0)


def square_rig(intr: CameraIntrinsics = None) -> Rig:
    """Four cameras on a 1 m square."""
    return polygon_rig(intr or default_intrinsics(), 4, 1.0)


LAYOUTS = {"train": training_rig, "wide": wide_rig, "square": square_rig}


def _waves(scale: float, phase: float = 0.0, **kw) -> Sinusoid:
    """Incommensurate wave mix with periods of roughly ``scale`` metres."""
    base = ((1.00, 0.31, 0.17), (0.23, 0.87, 0.41), (0.37, 0.19, 1.13), (0.71, -0.64, 0.29))
    k = 2 * math.pi / scale
    return Sinusoid(tuple(tuple(k * c for c in v) for v in base), phase, **kw)


def robot_body() -> Box:
    """Small box at the rig centre standing in for the robot body / LiDAR."""
    return Box((-0.06, -0.06, -0.3), (0.06, 0.06, 0.06), Checker(0.02), occluder=True)


def demo_scenes() -> list:
    """Five enclosed scenes, surfaces 1-50 m from the rig.

    Texture periods grow with viewing distance (about half the distance) so
    a one-candidate parallax step stays well below a period on every layout.
    """
    return [
        Scene((
            Box((-4.0, -3.0, -1.5), (5.0, 4.0, 3.5), _waves(2.0)),
            Sphere((1.5, 1.0, 1.8), 0.5, Checker(0.4, (0.95, 0.6, 0.2), (0.1, 0.2, 0.5))),
            Box((-2.0, -1.5, 0.5), (-1.2, -0.7, 2.0), _waves(1.0, 1.0)),
        ), name="room"),
        Scene((
            Sphere((0.0, 0.0, 0.0), 25.0, _waves(12.0)),
            Box((2.0, -1.0, 1.0), (3.0, 1.0, 3.0), Checker(0.5)),
            Sphere((-3.0, 2.0, 4.0), 1.0, _waves(2.5, 2.0)),
        ), name="dome"),
        Scene((
            Box((-15.0, -15.0, -2.0), (15.0, 15.0, 3.0), _waves(4.0)),
            Sphere((0.0, -2.0, 1.5), 0.8, Checker(0.5, (0.2, 0.8, 0.3), (0.9, 0.1, 0.1))),
            Box((4.0, 3.0, -2.0), (6.0, 5.0, 2.0), _waves(3.0, 0.5)),
        ), name="hall"),
        Scene((
            Sphere((0.0, 0.0, 0.0), 48.0, _waves(24.0)),
            Box((10.0, -5.0, 0.0), (14.0, 5.0, 8.0), _waves(7.0, 1.5)),
            Sphere((-8.0, -12.0, 10.0), 4.0, _waves(9.0, 0.3)),
            Plane((0.0, 0.0, 30.0), (0.0, 0.0, -1.0), _waves(15.0, 0.7)),
        ), name="open"),
        Scene((
            Box((-8.0, -6.0, -2.0), (7.0, 9.0, 6.0), _waves(3.0)),
            Sphere((1.0, 0.0, 1.2), 0.4, Checker(0.3)),
            Sphere((-1.5, 2.0, 2.5), 0.9, _waves(1.5, 2.5)),
            Box((-3.0, -4.0, -1.0), (-1.0, -2.5, 3.0), Checker(0.6, (0.8, 0.7, 0.1), (0.2, 0.1, 0.4))),
            Box((3.0, 4.0, 0.0), (5.0, 6.0, 1.5), _waves(1.5, 1.2)),
        ), name="clutter"),
    ]
