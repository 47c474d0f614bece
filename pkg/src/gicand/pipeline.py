"""End-to-end non-learned estimator: descriptors, sweep, variance volume, soft-argmin."""
from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Optional, Sequence

import numpy as np

from .candidates import CandidateSet
from .cost_volume import CostVolume, extract_descriptors, regularize_box, variance_volume
from .errors import ConfigurationError
from .estimator import (DEFAULT_TEMPERATURE, DistancePanorama, ProbabilityVolume,
                        regress_distance, softmax_probabilities)
from .rig import Rig
from .sweep import WarpTable, build_warp_table, sweep_views

log = logging.getLogger(__name__)

DEFAULT_RADIUS = 6
DEFAULT_H = 320


@dataclass(frozen=True, eq=False)
class Estimate:
    panorama: DistancePanorama
    prob: ProbabilityVolume
    volume: CostVolume
    candidates: CandidateSet

    @property
    def observable(self) -> np.ndarray:
        """Pixels where at least one candidate is seen by two or more cameras."""
        return (self.volume.count >= 2).any(axis=0)

    @property
    def covered(self) -> np.ndarray:
        """Pixels where every candidate is seen by two or more cameras."""
        return (self.volume.count >= 2).all(axis=0)


def check_inputs(images: Sequence[np.ndarray], rig: Rig):
    if len(images) != len(rig.cameras):
        raise ConfigurationError(f"{len(images)} images for a {len(rig.cameras)}-camera rig")
    for img, cam in zip(images, rig.cameras):
        want = (cam.intrinsics.height, cam.intrinsics.width)
        if np.shape(img)[:2] != want:
            raise ConfigurationError(
                f"image for camera {cam.name!r} is {np.shape(img)[:2]}, rig expects {want}")


def estimate(images: Sequence[np.ndarray], rig: Rig, cset: CandidateSet, H: int = DEFAULT_H,
             temperature: float = DEFAULT_TEMPERATURE, radius: int = DEFAULT_RADIUS,
             table: Optional[WarpTable] = None) -> Estimate:
    """Distance panorama (H x 2H) around ``rig.reference`` from one image per camera.

    ``table`` may be passed to reuse a warp table built for the same rig,
    candidates and panorama size.
    """
    check_inputs(images, rig)
    if table is None:
        table = build_warp_table(rig, cset, H, 2 * H)
    elif table.shape[1:] != (len(cset), H, 2 * H):
        raise ConfigurationError("warp table does not match candidates / panorama size")
    desc = [extract_descriptors(img) for img in images]
    vol = variance_volume(sweep_views(desc, table))
    vol = regularize_box(vol, radius)
    prob = softmax_probabilities(vol, temperature)
    return Estimate(regress_distance(prob, cset), prob, vol, cset)
