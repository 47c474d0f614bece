"""Analytic ray-traced scenes for desk-scale verification.

Scenes are lists of planes, spheres and axis-aligned boxes with procedural
textures and flat shading, so a surface point has exactly the same colour in
every view. One primitive may be flagged as the robot body (``occluder``):
it is visible in the fisheye images, zeroed in their masks, and ignored by
the ground-truth panorama.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import json
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .camera_model import CameraIntrinsics, pixel_grid, unproject
from .errors import ConfigurationError
from .evalbench import NO_HIT
from .estimator import DistancePanorama
from .rig import CameraExtrinsics, Rig, equirect_rays

EPS = 1e-9


@dataclass(frozen=True)
class Checker:
    scale: float = 0.25
    color_a: tuple = (0.9, 0.9, 0.9)
    color_b: tuple = (0.1, 0.1, 0.1)

    def __call__(self, p: np.ndarray) -> np.ndarray:
        # lattice shifted by half a cell so axis-aligned faces at multiples
        # of the scale never sit on a colour boundary
        k = np.floor(p / self.scale + 0.5).astype(np.int64).sum(axis=-1)
        odd = (k & 1).astype(bool)[..., None]
        return np.where(odd, np.asarray(self.color_b), np.asarray(self.color_a))


@dataclass(frozen=True)
class Sinusoid:
    """Blend of two colours driven by a sum of 3D sinusoids.

    ``frequency`` is one wave vector (rad/m) or a list of them.
    """

    frequency: tuple = ((6.0, 0.0, 0.0),)
    phase: float = 0.0
    color_a: tuple = (1.0, 1.0, 1.0)
    color_b: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        f = np.asarray(self.frequency, dtype=np.float64)
        if f.ndim == 1:
            f = f[None]
        if f.ndim != 2 or f.shape[1] != 3 or not np.all(np.isfinite(f)):
            raise ConfigurationError(f"bad sinusoid frequency {self.frequency}")
        object.__setattr__(self, "frequency", tuple(map(tuple, f.tolist())))

    def __call__(self, p: np.ndarray) -> np.ndarray:
        f = np.asarray(self.frequency)
        s = np.sin(p @ f.T + self.phase).mean(axis=-1)
        t = (0.5 + 0.5 * s)[..., None]
        return t * np.asarray(self.color_a) + (1.0 - t) * np.asarray(self.color_b)


Texture = Union[Checker, Sinusoid]


@dataclass(frozen=True)
class Plane:
    point: tuple
    normal: tuple
    texture: Texture = field(default_factory=Checker)
    occluder: bool = False

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=np.float64)
        if not np.all(np.isfinite(n)) or np.linalg.norm(n) == 0:
            raise ConfigurationError("plane normal must be finite and non-zero")
        object.__setattr__(self, "normal", tuple((n / np.linalg.norm(n)).tolist()))

    def intersect(self, o: np.ndarray, d: np.ndarray) -> np.ndarray:
        n = np.asarray(self.normal)
        denom = d @ n
        with np.errstate(divide="ignore", invalid="ignore"):
            t = ((np.asarray(self.point) - o) @ n) / denom
        return np.where((np.abs(denom) > 1e-15) & (t > EPS), t, np.inf)


@dataclass(frozen=True)
class Sphere:
    center: tuple
    radius: float
    texture: Texture = field(default_factory=Checker)
    occluder: bool = False

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigurationError("sphere radius must be positive")

    def intersect(self, o, d):
        oc = o - np.asarray(self.center)
        b = np.sum(oc * d, axis=-1)
        c = np.sum(oc * oc, axis=-1) - self.radius ** 2
        disc = b * b - c
        sq = np.sqrt(np.maximum(disc, 0.0))
        t0, t1 = -b - sq, -b + sq
        t = np.where(t0 > EPS, t0, np.where(t1 > EPS, t1, np.inf))
        return np.where(disc >= 0, t, np.inf)


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple
    texture: Texture = field(default_factory=Checker)
    occluder: bool = False

    def __post_init__(self):
        if not np.all(np.asarray(self.lo) < np.asarray(self.hi)):
            raise ConfigurationError("box min corner must be below max corner")

    def intersect(self, o, d):
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / d
            t_a = (np.asarray(self.lo) - o) * inv
            t_b = (np.asarray(self.hi) - o) * inv
        # zero direction components: slab is either everything or nothing
        inside = (o >= np.asarray(self.lo)) & (o <= np.asarray(self.hi))
        flat = d == 0
        t_a = np.where(flat, np.where(inside, -np.inf, np.inf), t_a)
        t_b = np.where(flat, np.where(inside, np.inf, -np.inf), t_b)
        t_near = np.minimum(t_a, t_b).max(axis=-1)
        t_far = np.maximum(t_a, t_b).min(axis=-1)
        hit = t_far >= np.maximum(t_near, EPS)
        t = np.where(t_near > EPS, t_near, t_far)
        return np.where(hit, t, np.inf)


Primitive = Union[Plane, Sphere, Box]


@dataclass(frozen=True)
class Scene:
    primitives: tuple
    background: tuple = (0.0, 0.0, 0.0)
    name: str = "scene"

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))
        if sum(p.occluder for p in self.primitives) > 1:
            raise ConfigurationError("at most one primitive may be the occluder")


def trace_rays(scene: Scene, origins, dirs, include_occluder: bool = True):
    """Nearest hits for many rays.

    Returns (t, index): hit distance (inf for a miss) and primitive index (-1).
    """
    d = np.asarray(dirs, dtype=np.float64)
    o = np.broadcast_to(np.asarray(origins, dtype=np.float64), d.shape)
    best = np.full(d.shape[:-1], np.inf)
    idx = np.full(d.shape[:-1], -1, dtype=np.int64)
    for i, prim in enumerate(scene.primitives):
        if prim.occluder and not include_occluder:
            continue
        t = prim.intersect(o, d)
        closer = t < best
        best = np.where(closer, t, best)
        idx = np.where(closer, i, idx)
    return best, idx


def shade(scene: Scene, points: np.ndarray, idx: np.ndarray) -> np.ndarray:
    out = np.broadcast_to(np.asarray(scene.background, dtype=np.float64), idx.shape + (3,)).copy()
    for i, prim in enumerate(scene.primitives):
        sel = idx == i
        if sel.any():
            out[sel] = prim.texture(points[sel])
    return out


def trace(scene: Scene, origin, direction):
    """Single ray: (hit distance or None, RGB colour in [0, 1])."""
    o = np.asarray(origin, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)
    t, idx = trace_rays(scene, o[None], d[None])
    if not np.isfinite(t[0]):
        return None, np.asarray(scene.background, dtype=np.float64)
    color = shade(scene, o[None] + t[:, None] * d[None], idx)[0]
    return float(t[0]), color


def render_fisheye(scene: Scene, intr: CameraIntrinsics, extr: CameraExtrinsics,
                   supersample: int = 2):
    """Render one fisheye view.

    Returns (rgb uint8 (h, w, 3), GT distance float (h, w), mask uint8 (h, w)).
    Colour is the mean of ``supersample**2`` sub-pixel rays; distance and
    mask come from the pixel-centre ray. Masks are 1 for valid pixels.
    """
    h, w = intr.height, intr.width
    origin = np.asarray(extr.translation)
    centers = pixel_grid(w, h)
    rays, valid = unproject(centers, intr)
    t, idx = trace_rays(scene, origin, extr.camera_to_rig_dirs(rays))
    dist = np.where(valid & np.isfinite(t), t, NO_HIT)
    occl = np.zeros_like(valid)
    for i, prim in enumerate(scene.primitives):
        if prim.occluder:
            occl = idx == i
    mask = (valid & ~occl).astype(np.uint8)

    n = max(int(supersample), 1)
    offsets = (np.arange(n) + 0.5) / n - 0.5
    acc = np.zeros((h, w, 3))
    for dv in offsets:
        for du in offsets:
            r, ok = unproject(centers + (du, dv), intr)
            r = np.where(ok[..., None], r, rays)
            dirs = extr.camera_to_rig_dirs(r)
            ts, ids = trace_rays(scene, origin, dirs)
            acc += shade(scene, origin + np.where(np.isfinite(ts), ts, 0.0)[..., None] * dirs, ids)
    rgb = np.where(valid[..., None], acc / (n * n), 0.0)
    rgb8 = np.clip(np.round(rgb * 255.0), 0, 255).astype(np.uint8)
    return rgb8, dist, mask


def render_equirect_gt(scene: Scene, rig: Rig, H: int, W: int) -> DistancePanorama:
    """Ground-truth distance panorama around the rig reference (occluder excluded)."""
    rays = equirect_rays(H, W)
    t, _ = trace_rays(scene, np.asarray(rig.reference), rays, include_occluder=False)
    return DistancePanorama(np.where(np.isfinite(t), t, NO_HIT))


def render_equirect_rgb(scene: Scene, rig: Rig, H: int, W: int) -> np.ndarray:
    """Colour panorama seen from the reference (for figures)."""
    rays = equirect_rays(H, W)
    o = np.asarray(rig.reference)
    t, idx = trace_rays(scene, o, rays, include_occluder=False)
    pts = o + np.where(np.isfinite(t), t, 0.0)[..., None] * rays
    return np.clip(np.round(shade(scene, pts, idx) * 255.0), 0, 255).astype(np.uint8)


def render_rig(scene: Scene, rig: Rig, supersample: int = 2):
    """Render every camera; returns (images, gt_distances, masks) lists."""
    out = [render_fisheye(scene, c.intrinsics, c.extrinsics, supersample) for c in rig.cameras]
    return [o[0] for o in out], [o[1] for o in out], [o[2] for o in out]


# --- JSON -----------------------------------------------------------------

def _texture_from_dict(d: Optional[dict]) -> Texture:
    if d is None:
        return Checker()
    kind = d.get("type", "checker")
    if kind == "checker":
        return Checker(float(d.get("scale", 0.25)), tuple(d.get("color_a", (0.9, 0.9, 0.9))),
                       tuple(d.get("color_b", (0.1, 0.1, 0.1))))
    if kind == "sinusoid":
        return Sinusoid(tuple(map(tuple, np.atleast_2d(d["frequency"]).tolist())),
                        float(d.get("phase", 0.0)), tuple(d.get("color_a", (1.0, 1.0, 1.0))),
                        tuple(d.get("color_b", (0.0, 0.0, 0.0))))
    raise ConfigurationError(f"unknown texture type {kind!r}")


def _texture_to_dict(t: Texture) -> dict:
    if isinstance(t, Checker):
        return {"type": "checker", "scale": t.scale, "color_a": list(t.color_a),
                "color_b": list(t.color_b)}
    return {"type": "sinusoid", "frequency": [list(f) for f in t.frequency], "phase": t.phase,
            "color_a": list(t.color_a), "color_b": list(t.color_b)}


def scene_from_dict(d: dict) -> Scene:
    prims = []
    for p in d["primitives"]:
        tex = _texture_from_dict(p.get("texture"))
        occ = bool(p.get("occluder", False))
        kind = p["type"]
        if kind == "plane":
            prims.append(Plane(tuple(p["point"]), tuple(p["normal"]), tex, occ))
        elif kind == "sphere":
            prims.append(Sphere(tuple(p["center"]), float(p["radius"]), tex, occ))
        elif kind == "box":
            prims.append(Box(tuple(p["min"]), tuple(p["max"]), tex, occ))
        else:
            raise ConfigurationError(f"unknown primitive type {kind!r}")
    return Scene(tuple(prims), tuple(d.get("background", (0.0, 0.0, 0.0))), d.get("name", "scene"))


def scene_to_dict(scene: Scene) -> dict:
    prims = []
    for p in scene.primitives:
        if isinstance(p, Plane):
            e = {"type": "plane", "point": list(p.point), "normal": list(p.normal)}
        elif isinstance(p, Sphere):
            e = {"type": "sphere", "center": list(p.center), "radius": p.radius}
        else:
            e = {"type": "box", "min": list(p.lo), "max": list(p.hi)}
        e["texture"] = _texture_to_dict(p.texture)
        if p.occluder:
            e["occluder"] = True
        prims.append(e)
    return {"name": scene.name, "background": list(scene.background), "primitives": prims}


def load_scene(path) -> Scene:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"scene file not found: {path}")
    with open(path) as f:
        return scene_from_dict(json.load(f))


def with_occluder(scene: Scene, occluder: Primitive) -> Scene:
    prims = tuple(p for p in scene.primitives if not p.occluder)
    return Scene(prims + (occluder,), scene.background, scene.name + "+occluder")


def drop_occluder(scene: Scene) -> Scene:
    return Scene(tuple(p for p in scene.primitives if not p.occluder), scene.background, scene.name)

