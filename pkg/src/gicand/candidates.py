"""Distance-candidate sets for sphere sweeping.

Two families are provided:

* EV: evenly spaced in inverse distance.
* GI: geometry-informed, evenly spaced in the ray angle ``atan(b / d)``
  that a point at distance ``d`` on the reference ray subtends at a camera
  displaced by baseline ``b`` perpendicular to that ray. Equal angle steps
  give roughly equal feature displacement in the projected image.

Sets are ordered by ascending distance; index 0 is the nearest candidate and
both range endpoints are always included exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict
from enum import Enum
import math
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .rig import Rig, max_baseline


class Kind(str, Enum):
    EV = "EV"
    GI = "GI"


@dataclass(frozen=True)
class CandidateSpec:
    d_min: float
    d_max: float
    n: int
    kind: Kind = Kind.GI
    baseline: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not (0.0 < self.d_min < self.d_max) or not math.isfinite(self.d_max):
            raise ConfigurationError(f"need 0 < d_min < d_max, got {self.d_min}, {self.d_max}")
        if int(self.n) != self.n or self.n < 2:
            raise ConfigurationError(f"candidate count must be an integer >= 2, got {self.n}")
        if self.kind is Kind.GI and (self.baseline is None or not self.baseline > 0):
            raise ConfigurationError("GI candidates need a positive baseline")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d


@dataclass(frozen=True, eq=False)
class CandidateSet:
    distances: np.ndarray
    spec: CandidateSpec

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=np.float64)
        d.setflags(write=False)
        object.__setattr__(self, "distances", d)

    def __len__(self):
        return len(self.distances)

    @property
    def inverse(self) -> np.ndarray:
        return 1.0 / self.distances

    def mean_inverse_step(self) -> float:
        return float(np.mean(np.abs(np.diff(self.inverse))))

    def to_dict(self) -> dict:
        return {"distances": self.distances.tolist(), "spec": self.spec.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "CandidateSet":
        return cls(np.asarray(d["distances"], dtype=np.float64), CandidateSpec(**d["spec"]))


def _check(spec: CandidateSpec, kind: Kind):
    if spec.kind is not kind:
        raise ConfigurationError(f"expected a {kind.value} spec, got {spec.kind.value}")


def ev_candidates(spec: CandidateSpec) -> CandidateSet:
    _check(spec, Kind.EV)
    k = np.arange(spec.n)
    inv = 1.0 / spec.d_min - k * (1.0 / spec.d_min - 1.0 / spec.d_max) / (spec.n - 1)
    d = 1.0 / inv
    d[0], d[-1] = spec.d_min, spec.d_max
    return CandidateSet(d, spec)


def gi_candidates(spec: CandidateSpec) -> CandidateSet:
    _check(spec, Kind.GI)
    b = spec.baseline
    near, far = math.atan(b / spec.d_min), math.atan(b / spec.d_max)
    theta = near - np.arange(spec.n) * (near - far) / (spec.n - 1)
    d = b / np.tan(theta)
    d[0], d[-1] = spec.d_min, spec.d_max
    return CandidateSet(d, spec)


def make_candidates(spec: CandidateSpec) -> CandidateSet:
    return gi_candidates(spec) if spec.kind is Kind.GI else ev_candidates(spec)


def angular_steps(cset: CandidateSet, b: float) -> np.ndarray:
    """Ray-angle increments between consecutive candidates seen at baseline ``b``."""
    if not b > 0:
        raise ConfigurationError("baseline must be positive")
    theta = np.arctan(b / cset.distances)
    return theta[:-1] - theta[1:]


def candidate_for_rig(rig: Rig, d_min: float, d_max: float, n: int, kind=Kind.GI) -> CandidateSet:
    """Candidate set adapted to a deployed rig; GI uses the rig's maximum baseline."""
    kind = Kind(kind)
    baseline = max_baseline(rig) if kind is Kind.GI else None
    return make_candidates(CandidateSpec(d_min, d_max, n, kind, baseline))
