"""Double Sphere fisheye camera model.

Pixel convention: integer pixel (row i, col j) has continuous coordinate
(u=j, v=i). All functions are vectorized over leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    xi: float
    alpha: float
    width: int
    height: int
    fov_limit: float = math.radians(95.0)

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.fx <= 0 or self.fy <= 0:
            raise ConfigurationError("focal lengths must be positive")
        if not 0.0 < self.fov_limit <= math.pi:
            raise ConfigurationError(f"fov_limit must lie in (0, pi], got {self.fov_limit}")
        if self.width < 2 or self.height < 2:
            raise ConfigurationError("image must be at least 2x2")

    @classmethod
    def from_dict(cls, d: dict) -> "CameraIntrinsics":
        return cls(
            fx=float(d["fx"]), fy=float(d["fy"]), cx=float(d["cx"]), cy=float(d["cy"]),
            xi=float(d["xi"]), alpha=float(d["alpha"]),
            width=int(d["width"]), height=int(d["height"]),
            fov_limit=math.radians(float(d.get("fov_deg", 95.0))),
        )

    def to_dict(self) -> dict:
        return {
            "fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
            "xi": self.xi, "alpha": self.alpha,
            "width": self.width, "height": self.height,
            "fov_deg": math.degrees(self.fov_limit),
        }


def _domain_weight(intr: CameraIntrinsics) -> float:
    a = intr.alpha
    w1 = a / (1.0 - a) if a <= 0.5 else (1.0 - a) / a
    # Usenko et al. w2: projection is invertible only for z > -w2 * d1.
    xi = intr.xi
    return (w1 + xi) / math.sqrt(2.0 * w1 * xi + xi * xi + 1.0)


def _angle_ok(z_over_norm: np.ndarray, fov_limit: float) -> np.ndarray:
    # angle <= fov_limit  <=>  cos(angle) >= cos(fov_limit); small slack for roundoff
    return z_over_norm >= math.cos(fov_limit) - 1e-15


def project(points, intr: CameraIntrinsics):
    """Project camera-frame points to pixel coordinates.

    Args:
        points: array (..., 3) in meters. Scale does not matter.
        intr: camera intrinsics.

    Returns:
        uv: array (..., 2) of (u, v) pixel coordinates.
        valid: bool array (...) -- model domain, FoV limit and image bounds.
    """
    p = np.asarray(points, dtype=np.float64)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    d1 = np.sqrt(x * x + y * y + z * z)
    if np.any(d1 == 0.0):
        raise DomainError("cannot project the zero vector")
    xi, a = intr.xi, intr.alpha
    zz = xi * d1 + z
    d2 = np.sqrt(x * x + y * y + zz * zz)
    denom = a * d2 + (1.0 - a) * zz
    with np.errstate(divide="ignore", invalid="ignore"):
        u = intr.fx * x / denom + intr.cx
        v = intr.fy * y / denom + intr.cy
    valid = (z > -_domain_weight(intr) * d1) & (denom > 0)
    valid &= _angle_ok(z / d1, intr.fov_limit)
    valid &= (u >= 0) & (u <= intr.width - 1) & (v >= 0) & (v <= intr.height - 1)
    return np.stack([u, v], axis=-1), valid


def unproject(uv, intr: CameraIntrinsics):
    """Lift pixel coordinates to unit rays in the camera frame.

    Returns (rays (..., 3), valid (...)); invalid rays are set to (0, 0, 1).
    """
    uv = np.asarray(uv, dtype=np.float64)
    mx = (uv[..., 0] - intr.cx) / intr.fx
    my = (uv[..., 1] - intr.cy) / intr.fy
    r2 = mx * mx + my * my
    a, xi = intr.alpha, intr.xi
    if a > 0.5:
        valid = r2 <= 1.0 / (2.0 * a - 1.0)
    else:
        valid = np.ones(r2.shape, dtype=bool)
    r2s = np.where(valid, r2, 0.0)
    mz = (1.0 - a * a * r2s) / (a * np.sqrt(1.0 - (2.0 * a - 1.0) * r2s) + 1.0 - a)
    disc = mz * mz + (1.0 - xi * xi) * r2s
    valid &= disc >= 0
    s = (mz * xi + np.sqrt(np.maximum(disc, 0.0))) / (mz * mz + r2s)
    ray = np.stack([s * mx, s * my, s * mz - xi], axis=-1)
    norm = np.linalg.norm(ray, axis=-1)
    valid &= norm > 0
    ray = ray / np.where(norm > 0, norm, 1.0)[..., None]
    valid &= _angle_ok(ray[..., 2], intr.fov_limit)
    ray = np.where(valid[..., None], ray, np.array([0.0, 0.0, 1.0]))
    return ray, valid


def pixel_grid(width: int, height: int) -> np.ndarray:
    """(height, width, 2) array of pixel-center coordinates (u, v)."""
    v, u = np.mgrid[0:height, 0:width].astype(np.float64)
    return np.stack([u, v], axis=-1)


def fov_mask(intr: CameraIntrinsics) -> np.ndarray:
    """uint8 (height, width) mask, 1 where the pixel center unprojects validly."""
    _, valid = unproject(pixel_grid(intr.width, intr.height), intr)
    return valid.astype(np.uint8)
