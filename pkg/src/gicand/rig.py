"""Multi-camera rigs and the equirectangular ray grid of the output panorama."""
from __future__ import annotations

from dataclasses import dataclass, field
import hashlib
import json
import math
from typing import Optional, Sequence

import numpy as np

from .camera_model import CameraIntrinsics
from .errors import ConfigurationError


def quat_to_matrix(q) -> np.ndarray:
    """Rotation matrix for a unit quaternion given as (w, x, y, z)."""
    w, x, y, z = (float(c) for c in q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


@dataclass(frozen=True)
class CameraExtrinsics:
    """Camera-to-rig rotation (unit quaternion w, x, y, z) and camera center in the rig frame."""

    rotation: tuple = (1.0, 0.0, 0.0, 0.0)
    translation: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        q = tuple(float(c) for c in self.rotation)
        t = tuple(float(c) for c in self.translation)
        if len(q) != 4 or len(t) != 3:
            raise ConfigurationError("rotation needs 4 components, translation 3")
        if abs(math.sqrt(sum(c * c for c in q)) - 1.0) > 1e-9:
            raise ConfigurationError(f"rotation quaternion is not unit norm: {q}")
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "translation", t)

    @property
    def matrix(self) -> np.ndarray:
        return quat_to_matrix(self.rotation)

    def rig_to_camera(self, points) -> np.ndarray:
        """Map rig-frame points (..., 3) into the camera frame."""
        p = np.asarray(points, dtype=np.float64) - np.asarray(self.translation)
        # R^T p for row vectors
        return p @ self.matrix

    def camera_to_rig_dirs(self, dirs) -> np.ndarray:
        return np.asarray(dirs, dtype=np.float64) @ self.matrix.T


@dataclass(frozen=True)
class Camera:
    name: str
    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics
    mask: Optional[np.ndarray] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Rig:
    cameras: tuple
    reference: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        cams = tuple(self.cameras)
        if len(cams) < 2:
            raise ConfigurationError("a rig needs at least 2 cameras")
        names = [c.name for c in cams]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"camera names must be unique: {names}")
        for c in cams:
            if c.mask is not None:
                shape = np.shape(c.mask)
                if shape != (c.intrinsics.height, c.intrinsics.width):
                    raise ConfigurationError(
                        f"mask of camera {c.name!r} has shape {shape}, expected "
                        f"{(c.intrinsics.height, c.intrinsics.width)}")
        ref = tuple(float(x) for x in self.reference)
        if len(ref) != 3:
            raise ConfigurationError("reference must be a 3D point")
        object.__setattr__(self, "cameras", cams)
        object.__setattr__(self, "reference", ref)

    def __len__(self):
        return len(self.cameras)

    def with_masks(self, masks: Sequence[Optional[np.ndarray]]) -> "Rig":
        cams = tuple(Camera(c.name, c.intrinsics, c.extrinsics, m)
                     for c, m in zip(self.cameras, masks, strict=True))
        return Rig(cams, self.reference)

    def to_dict(self) -> dict:
        """JSON-ready description (masks are not embedded)."""
        return {
            "reference": list(self.reference),
            "cameras": [
                {"name": c.name, "intrinsics": c.intrinsics.to_dict(),
                 "extrinsics": {"t": list(c.extrinsics.translation),
                                "q": list(c.extrinsics.rotation)}}
                for c in self.cameras
            ],
        }

    def digest(self) -> str:
        """Short stable hash of the geometry, masks included."""
        h = hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode())
        for c in self.cameras:
            if c.mask is not None:
                h.update(np.ascontiguousarray(c.mask, dtype=np.uint8).tobytes())
        return h.hexdigest()[:16]


def equirect_rays(H: int, W: int) -> np.ndarray:
    """Unit rays (H, W, 3) of an equirectangular panorama, rig +z up.

    Row 0 is the top (latitude near +pi/2), column 0 is longitude near -pi.
    """
    if H < 2 or W != 2 * H:
        raise ConfigurationError(f"panorama must be H x 2H with H >= 2, got {H}x{W}")
    lon = (np.arange(W) + 0.5) / W * 2.0 * np.pi - np.pi
    lat = np.pi / 2 - (np.arange(H) + 0.5) / H * np.pi
    lat, lon = np.meshgrid(lat, lon, indexing="ij")
    return np.stack([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)], axis=-1)


def max_baseline(rig: Rig) -> float:
    ref = np.asarray(rig.reference)
    return float(max(np.linalg.norm(np.asarray(c.extrinsics.translation) - ref)
                     for c in rig.cameras))


def polygon_rig(intr: CameraIntrinsics, n: int, side: float, reference=None,
                names: Optional[Sequence[str]] = None) -> Rig:
    """Upward-facing cameras on a regular n-gon of the given side length in the z=0 plane.

    The reference defaults to the polygon centroid (the origin).
    """
    radius = side / (2.0 * math.sin(math.pi / n))
    cams = []
    for k in range(n):
        ang = 2.0 * math.pi * k / n + math.pi / 2
        t = (radius * math.cos(ang), radius * math.sin(ang), 0.0)
        name = names[k] if names else f"cam{k}"
        cams.append(Camera(name, intr, CameraExtrinsics((1.0, 0.0, 0.0, 0.0), t)))
    return Rig(tuple(cams), reference if reference is not None else (0.0, 0.0, 0.0))
