"""Fixed photometric descriptors and occlusion-aware cost volumes."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .errors import ConfigurationError
from .sweep import WarpedStack

# Cost of a cell seen by fewer than two cameras. Weighted channels are bounded
# so the population variance never exceeds 0.25 * (1 + 0.25 + 0.25) = 0.375.
SENTINEL_COST = 1.0
CHANNEL_WEIGHTS = (1.0, 0.5, 0.5)
LUMA = (0.299, 0.587, 0.114)


@dataclass(frozen=True, eq=False)
class CostVolume:
    """Cost volume over (n_candidates, H, W).

    ``cost`` holds the scalar variance cost (variance mode) and ``features``
    the stacked per-camera descriptors (concat mode, shape (n, H, W, C * n_cam)).
    """

    count: np.ndarray
    cost: Optional[np.ndarray] = None
    features: Optional[np.ndarray] = None

    @property
    def mode(self) -> str:
        return "variance" if self.cost is not None else "concat"

    @property
    def sentinel(self) -> np.ndarray:
        return self.count < 2

    @property
    def n_candidates(self) -> int:
        return self.count.shape[0]


def to_gray(image) -> np.ndarray:
    """Luma in [0, 1] from an 8-bit or float RGB/grayscale image."""
    img = np.asarray(image)
    if img.size == 0:
        raise ConfigurationError("empty image")
    img = img.astype(np.float64) / 255.0 if img.dtype == np.uint8 else img.astype(np.float64)
    if img.ndim == 3:
        if img.shape[2] == 1:
            return img[..., 0]
        return img[..., :3] @ np.asarray(LUMA)
    if img.ndim != 2:
        raise ConfigurationError(f"unsupported image shape {img.shape}")
    return img


def extract_descriptors(image) -> np.ndarray:
    """(h, w, 3) descriptor map: weighted [gray, d/du gray, d/dv gray]."""
    g = to_gray(image)
    p = np.pad(g, 1, mode="edge")
    gx = (p[1:-1, 2:] - p[1:-1, :-2]) / 2.0
    gy = (p[2:, 1:-1] - p[:-2, 1:-1]) / 2.0
    wg, wx, wy = CHANNEL_WEIGHTS
    return np.stack([wg * g, wx * gx, wy * gy], axis=-1)


def variance_volume(stack: WarpedStack) -> CostVolume:
    """Per-channel population variance over valid views, summed over channels."""
    if stack.n_cameras < 2:
        raise ConfigurationError("variance aggregation needs at least 2 cameras")
    w = stack.valid[..., None].astype(np.float64)
    count = stack.valid.sum(axis=0)
    n = np.maximum(count, 1)[..., None]
    mean = (stack.values * w).sum(axis=0) / n
    var = (((stack.values - mean) ** 2) * w).sum(axis=0) / n
    cost = var.sum(axis=-1)
    cost = np.where(count >= 2, cost, SENTINEL_COST)
    return CostVolume(count=count, cost=cost)


def concat_volume(stack: WarpedStack, fill=None) -> CostVolume:
    """Stack every camera's descriptor per cell; invalid entries become ``fill``."""
    C = stack.values.shape[-1]
    fill = np.zeros(C) if fill is None else np.asarray(fill, dtype=np.float64)
    vals = np.where(stack.valid[..., None], stack.values, fill)
    # (cam, cand, H, W, C) -> (cand, H, W, cam * C)
    feats = np.moveaxis(vals, 0, 3).reshape(vals.shape[1:4] + (-1,))
    return CostVolume(count=stack.valid.sum(axis=0), features=feats)


def regularize_box(vol: CostVolume, radius: int = 2) -> CostVolume:
    """Mean of valid costs in a (2r+1)^2 window per candidate slice.

    Columns wrap around (the panorama is periodic in longitude); rows do not.
    Sentinel cells neither contribute nor change.
    """
    if vol.mode != "variance":
        raise ConfigurationError("box regularization needs a variance-mode volume")
    if radius < 0:
        raise ConfigurationError("radius must be >= 0")
    if radius == 0:
        return vol
    ok = ~vol.sentinel
    vals = np.where(ok, vol.cost, 0.0)
    size = (1, 2 * radius + 1, 2 * radius + 1)
    modes = ("constant", "constant", "wrap")
    s = ndimage.uniform_filter(vals, size=size, mode=modes)
    c = ndimage.uniform_filter(ok.astype(np.float64), size=size, mode=modes)
    # c > 0 wherever the centre cell is valid
    out = np.where(ok, s / np.where(ok, c, 1.0), SENTINEL_COST)
    return CostVolume(count=vol.count, cost=out)
