"""Distance-candidate selection and sphere-sweep distance estimation for fisheye rigs."""

from .candidates import (CandidateSet, CandidateSpec, Kind, angular_steps, candidate_for_rig,
                         ev_candidates, gi_candidates, make_candidates)
from .camera_model import CameraIntrinsics, fov_mask, project, unproject
from .errors import ConfigurationError, DomainError
from .pipeline import estimate
from .rig import Camera, CameraExtrinsics, Rig, equirect_rays, max_baseline

__version__ = "0.1.0"
