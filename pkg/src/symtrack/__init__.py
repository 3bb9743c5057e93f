"""Subpixel particle localization by mirror-symmetry correlation, with
classic reference detectors (centroid, circular Hough, mirror
cross-correlation, quadrant interpolation), a synthetic image generator, and
a benchmark harness."""

__version__ = "0.1.0"

from .errors import (
    BoundaryError,
    CollinearityError,
    DecodeError,
    FitError,
    GeometryError,
    NoParticleError,
    SymtrackError,
)
from .image import Point, Region, crop, euclidean_error, measure_snr
from .synth import ParticleSpec, TrialConfig, add_noise, make_trial, render_particle
from .csym import CsymParams, detect as detect_csym
from .baselines import BaselineParams, detect_cht, detect_com, detect_qi, detect_xcorr

__all__ = [
    "__version__",
    "BoundaryError",
    "CollinearityError",
    "DecodeError",
    "FitError",
    "GeometryError",
    "NoParticleError",
    "SymtrackError",
    "Point",
    "Region",
    "crop",
    "euclidean_error",
    "measure_snr",
    "ParticleSpec",
    "TrialConfig",
    "add_noise",
    "make_trial",
    "render_particle",
    "CsymParams",
    "detect_csym",
    "BaselineParams",
    "detect_cht",
    "detect_com",
    "detect_qi",
    "detect_xcorr",
]
