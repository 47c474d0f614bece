"""Inverse-distance metrics (MAE, RMSE, SSIM) and the layout-transfer experiment."""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np
from scipy import ndimage

from .errors import DomainError

INV_MIN, INV_MAX = 0.01, 2.0
# no-hit pixels are stored as the largest finite float32
NO_HIT = float(np.finfo(np.float32).max)

SSIM_SIGMA = 1.5
SSIM_WIN = 11
SSIM_K1, SSIM_K2 = 0.01, 0.03
SSIM_RANGE = INV_MAX - INV_MIN


@dataclass
class EvalReport:
    mae: float
    rmse: float
    ssim: float
    pixels: int
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def hit_mask(distance) -> np.ndarray:
    d = np.asarray(distance, dtype=np.float64)
    return np.isfinite(d) & (d > 0) & (d < NO_HIT)


def to_inverse(distance) -> np.ndarray:
    """Clamped inverse distance; no-hit pixels map to the far clamp (mask them out)."""
    d = np.asarray(distance, dtype=np.float64)
    with np.errstate(divide="ignore"):
        inv = np.where(hit_mask(d), 1.0 / np.where(d > 0, d, 1.0), 0.0)
    return np.clip(inv, INV_MIN, INV_MAX)


def _masked(pred, gt, mask):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise DomainError(f"shape mismatch {pred.shape} vs {gt.shape}")
    m = np.ones(gt.shape, bool) if mask is None else np.asarray(mask, dtype=bool)
    if not m.any():
        raise DomainError("empty mask")
    return pred[m] - gt[m]


def mae(pred_inv, gt_inv, mask=None) -> float:
    return float(np.mean(np.abs(_masked(pred_inv, gt_inv, mask))))


def rmse(pred_inv, gt_inv, mask=None) -> float:
    return float(np.sqrt(np.mean(_masked(pred_inv, gt_inv, mask) ** 2)))


def _gauss(x):
    # normalized 11-tap gaussian, applied separably
    r = SSIM_WIN // 2
    k = np.exp(-0.5 * (np.arange(-r, r + 1) / SSIM_SIGMA) ** 2)
    k /= k.sum()
    x = ndimage.correlate1d(x, k, axis=0, mode="reflect")
    return ndimage.correlate1d(x, k, axis=1, mode="reflect")


def ssim_map(a, b) -> np.ndarray:
    """Per-pixel SSIM of two maps (window centred on each pixel)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c1 = (SSIM_K1 * SSIM_RANGE) ** 2
    c2 = (SSIM_K2 * SSIM_RANGE) ** 2
    mu_a, mu_b = _gauss(a), _gauss(b)
    saa = _gauss(a * a) - mu_a ** 2
    sbb = _gauss(b * b) - mu_b ** 2
    sab = _gauss(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * sab + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (saa + sbb + c2)
    return num / den


def ssim(pred_inv, gt_inv, mask=None) -> float:
    """Mean SSIM over 11x11 windows lying entirely inside the mask."""
    pred_inv = np.asarray(pred_inv, dtype=np.float64)
    gt_inv = np.asarray(gt_inv, dtype=np.float64)
    if pred_inv.shape != gt_inv.shape:
        raise DomainError(f"shape mismatch {pred_inv.shape} vs {gt_inv.shape}")
    if min(gt_inv.shape) < SSIM_WIN:
        raise DomainError(f"SSIM needs at least {SSIM_WIN}x{SSIM_WIN} pixels")
    m = np.ones(gt_inv.shape, bool) if mask is None else np.asarray(mask, dtype=bool)
    # window centres whose full 11x11 support is valid and inside the image
    full = ndimage.binary_erosion(m, structure=np.ones((SSIM_WIN, SSIM_WIN)), border_value=0)
    if not full.any():
        raise DomainError("no fully valid SSIM window")
    # masked-out pixels never enter a counted window, so their values are irrelevant
    a = np.where(m, pred_inv, 0.0)
    b = np.where(m, gt_inv, 0.0)
    s = float(np.mean(ssim_map(a, b)[full]))
    return min(max(s, 0.0), 1.0)


def evaluate(pred_distance, gt_distance, mask=None, config: Optional[dict] = None) -> EvalReport:
    """Metrics on clamped inverse distance over hit pixels (and ``mask`` if given)."""
    m = hit_mask(gt_distance)
    if mask is not None:
        m &= np.asarray(mask, dtype=bool)
    p, g = to_inverse(pred_distance), to_inverse(gt_distance)
    return EvalReport(mae=mae(p, g, m), rmse=rmse(p, g, m), ssim=ssim(p, g, m),
                      pixels=int(m.sum()), config=dict(config or {}))
