"""Spherical sweeping: warp lookup tables and warped descriptor stacks.

For every panorama pixel, candidate distance and camera the table stores
where the swept point lands in that camera's image. Tables depend only on
(rig, candidates, panorama size) and are built once per layout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .camera_model import fov_mask, project
from .candidates import CandidateSet
from .errors import ConfigurationError
from .rig import Rig, equirect_rays

# swept points closer than this to a camera center are not projected
MIN_CAMERA_DISTANCE = 1e-3

# The gradient channels of a descriptor read the 4-neighbours of a pixel, so a
# pixel only yields a clean descriptor if that cross-shaped stencil avoids
# masked and out-of-FoV pixels.
_STENCIL = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True, eq=False)
class WarpTable:
    """Sample coordinates, shape (n_cameras, n_candidates, H, W) each."""

    u: np.ndarray
    v: np.ndarray
    valid: np.ndarray
    image_sizes: tuple  # (height, width) per camera

    @property
    def shape(self):
        return self.valid.shape


@dataclass(frozen=True, eq=False)
class WarpedStack:
    """Descriptors (n_cameras, n_candidates, H, W, C) plus validity (n_cameras, n_candidates, H, W)."""

    values: np.ndarray
    valid: np.ndarray

    @property
    def n_cameras(self):
        return self.values.shape[0]


def camera_valid_mask(camera) -> np.ndarray:
    """Bool (height, width): pixels whose descriptor stencil is inside the FoV and unoccluded."""
    m = fov_mask(camera.intrinsics).astype(bool)
    if camera.mask is not None:
        m &= np.asarray(camera.mask) > 0
    # border_value=1: descriptors replicate the image edge, which is not a defect
    return ndimage.binary_erosion(m, _STENCIL, border_value=1)


def _neighbors(u, v, width, height):
    u0 = np.floor(u).astype(np.int64)
    v0 = np.floor(v).astype(np.int64)
    u0 = np.clip(u0, 0, width - 1)
    v0 = np.clip(v0, 0, height - 1)
    u1 = np.minimum(u0 + 1, width - 1)
    v1 = np.minimum(v0 + 1, height - 1)
    return u0, v0, u1, v1


def build_warp_table(rig: Rig, cset: CandidateSet, H: int, W: int) -> WarpTable:
    rays = equirect_rays(H, W)
    ref = np.asarray(rig.reference)
    n_cam, n_cand = len(rig.cameras), len(cset)
    u = np.zeros((n_cam, n_cand, H, W))
    v = np.zeros((n_cam, n_cand, H, W))
    valid = np.zeros((n_cam, n_cand, H, W), dtype=bool)
    for c, cam in enumerate(rig.cameras):
        intr = cam.intrinsics
        usable = camera_valid_mask(cam)
        for k, d in enumerate(cset.distances):
            pc = cam.extrinsics.rig_to_camera(ref + d * rays)
            near = np.linalg.norm(pc, axis=-1) < MIN_CAMERA_DISTANCE
            pc[near] = (0.0, 0.0, 1.0)
            uv, ok = project(pc, intr)
            ok &= ~near
            uu = np.where(ok, uv[..., 0], 0.0)
            vv = np.where(ok, uv[..., 1], 0.0)
            u0, v0, u1, v1 = _neighbors(uu, vv, intr.width, intr.height)
            ok &= usable[v0, u0] & usable[v0, u1] & usable[v1, u0] & usable[v1, u1]
            u[c, k], v[c, k], valid[c, k] = uu, vv, ok
    sizes = tuple((c.intrinsics.height, c.intrinsics.width) for c in rig.cameras)
    return WarpTable(u, v, valid, sizes)


def sample_bilinear(image, coord) -> np.ndarray:
    """Bilinearly interpolate a (h, w) or (h, w, C) map at one (u, v) coordinate."""
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape[:2]
    u, v = float(coord[0]), float(coord[1])
    assert 0.0 <= u <= w - 1 and 0.0 <= v <= h - 1, f"coordinate {(u, v)} out of bounds"
    out = bilinear(img, np.array([u]), np.array([v]))
    return out[0]


def bilinear(image: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized bilinear sampling; coordinates are clamped to the image."""
    h, w = image.shape[:2]
    u = np.clip(u, 0.0, w - 1)
    v = np.clip(v, 0.0, h - 1)
    u0, v0, u1, v1 = _neighbors(u, v, w, h)
    fu = u - u0
    fv = v - v0
    if image.ndim == 3:
        fu = fu[..., None]
        fv = fv[..., None]
    top = image[v0, u0] * (1 - fu) + image[v0, u1] * fu
    bot = image[v1, u0] * (1 - fu) + image[v1, u1] * fu
    return top * (1 - fv) + bot * fv


def sweep_views(descriptors: Sequence[np.ndarray], table: WarpTable) -> WarpedStack:
    """Sample each camera's descriptor map at the table coordinates."""
    if len(descriptors) != table.shape[0]:
        raise ConfigurationError(
            f"{len(descriptors)} descriptor maps for a {table.shape[0]}-camera table")
    maps = []
    for c, (dm, size) in enumerate(zip(descriptors, table.image_sizes)):
        dm = np.asarray(dm, dtype=np.float64)
        if dm.ndim == 2:
            dm = dm[..., None]
        if dm.shape[:2] != tuple(size):
            raise ConfigurationError(
                f"descriptor map {c} has size {dm.shape[:2]}, camera expects {tuple(size)}")
        maps.append(dm)
    channels = {m.shape[2] for m in maps}
    if len(channels) != 1:
        raise ConfigurationError(f"descriptor maps disagree on channel count: {channels}")
    C = channels.pop()
    values = np.zeros(table.shape + (C,))
    for c, dm in enumerate(maps):
        for k in range(table.shape[1]):
            ok = table.valid[c, k]
            values[c, k][ok] = bilinear(dm, table.u[c, k][ok], table.v[c, k][ok])
    return WarpedStack(values, table.valid.copy())
