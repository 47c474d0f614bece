"""Probability volumes, soft-argmin distance regression and volume losses.

Both the regression and the two-hot targets interpolate linearly in inverse
distance, which makes ``regress_distance(two_hot_target(d))`` return ``d``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .candidates import CandidateSet
from .cost_volume import CostVolume
from .errors import ConfigurationError, DomainError

# Matching costs of real views sit around 1e-3..5e-2; 0.05 would flatten them.
DEFAULT_TEMPERATURE = 3e-4
PROB_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ProbabilityVolume:
    prob: np.ndarray  # (n_candidates, H, W)


@dataclass(frozen=True, eq=False)
class DistancePanorama:
    distance: np.ndarray  # (H, W) meters
    confidence: Optional[np.ndarray] = None


def softmax_probabilities(vol: CostVolume, temperature: float = DEFAULT_TEMPERATURE) -> ProbabilityVolume:
    if not temperature > 0:
        raise ConfigurationError(f"temperature must be positive, got {temperature}")
    if vol.mode != "variance":
        raise ConfigurationError("softmax needs a variance-mode volume")
    logits = -vol.cost / temperature
    logits = logits - logits.max(axis=0, keepdims=True)
    e = np.exp(logits)
    return ProbabilityVolume(e / e.sum(axis=0, keepdims=True))


def regress_distance(prob: ProbabilityVolume, cset: CandidateSet) -> DistancePanorama:
    p = prob.prob
    if p.shape[0] != len(cset):
        raise ConfigurationError(f"{p.shape[0]} probability slices for {len(cset)} candidates")
    inv = np.tensordot(cset.inverse, p, axes=(0, 0))
    d = 1.0 / inv
    # 1 / (1 / d_k) is not always bit-identical to d_k
    onehot = p.max(axis=0) == 1.0
    d = np.where(onehot, cset.distances[p.argmax(axis=0)], d)
    # guard the closed range against roundoff in the weighted sum
    d = np.clip(d, cset.distances[0], cset.distances[-1])
    return DistancePanorama(d, p.max(axis=0))


def two_hot_target(gt_distance, cset: CandidateSet) -> np.ndarray:
    """Two-hot target(s) over the candidates.

    Accepts a scalar (returns shape (n,)) or an array of distances (returns
    shape (n,) + gt.shape). Distances are clamped to the candidate range.
    """
    gt = np.asarray(gt_distance, dtype=np.float64)
    if np.any(~(gt > 0)):
        raise DomainError("ground-truth distance must be positive")
    d = cset.distances
    g = np.clip(gt, d[0], d[-1])
    k = np.clip(np.searchsorted(d, g, side="right") - 1, 0, len(d) - 2)
    inv_lo, inv_hi = 1.0 / d[k], 1.0 / d[k + 1]
    w_hi = (inv_lo - 1.0 / g) / (inv_lo - inv_hi)
    w_hi = np.clip(w_hi, 0.0, 1.0)
    out = np.zeros((len(d),) + g.shape)
    idx = np.indices(g.shape)
    out[(k, *idx)] = 1.0 - w_hi
    out[(k + 1, *idx)] += w_hi
    return out


def soft_cross_entropy(pred: ProbabilityVolume, target: np.ndarray, mask=None) -> float:
    """Mean over valid pixels of -sum_k t_k log p_k."""
    p = pred.prob
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ConfigurationError(f"prediction {p.shape} and target {t.shape} differ")
    ce = -(t * np.log(np.maximum(p, PROB_FLOOR))).sum(axis=0)
    if mask is None:
        return float(ce.mean())
    m = np.asarray(mask, dtype=bool)
    if not m.any():
        raise DomainError("empty mask")
    return float(ce[m].mean())


def entropy(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    return -(t * np.log(np.maximum(t, PROB_FLOOR))).sum(axis=0)


def l1_inverse_distance(pred: DistancePanorama, gt: DistancePanorama, mask) -> float:
    from .evalbench import mae, to_inverse

    return mae(to_inverse(pred.distance), to_inverse(gt.distance), mask)
