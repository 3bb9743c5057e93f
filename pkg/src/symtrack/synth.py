"""Synthetic particle image generator with controlled radius and SNR.

Images are rendered as a uniform background plus a radial intensity pattern
placed at a subpixel ground-truth position.  Randomized trials draw the
pattern, contrast polarity, background level, mild radial scaling and x/y
stretching, the true center, and the initial position guess from a single
seeded stream, so every trial is reproducible from its seed alone.

Noise is zero-mean Gaussian.  The noise standard deviation for a requested
SNR is derived from the noise-free image contrast:

    sigma = (I_max - I_min) / (4 * (snr + 1))

so that ``measure_snr`` on the clean image with that sigma returns the
requested SNR exactly.  ``snr=inf`` yields sigma 0 (a noise-free trial).

Randomness uses numpy's PCG64 generator seeded through ``SeedSequence``;
substreams are split with ``SeedSequence.spawn`` (one child per independent
purpose, e.g. spec draws vs. noise), which keeps sweeps reproducible and
safe to parallelize.
"""

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GeometryError
from .image import Point

# Radial patterns are functions of (rho, radius_px) where rho is the
# distance from the center over the effective particle radius; they return a
# dimensionless intensity offset in [-1, 1].  The rendered image is
# background + amplitude * f(rho, radius) with amplitude = min(bg, 1 - bg),
# which keeps every sample inside [0, 1] with or without color inversion.
#
# Fine structure (the bead rim, the ring ridge, the oscillation period of
# the airy-like pattern) is capped at a fixed pixel scale: in real particle
# images those widths are set by the optics, not by the particle size, so a
# large particle shows many sharp rings instead of one smooth blob.
_SPOT_CORE_SIGMA = 0.35
_SPOT_RIM_DEPTH = 0.45
_SPOT_RIM_POS = 0.9
_RIM_WIDTH_MAX_PX = 6.0
_RIM_WIDTH_REL = 0.15
_RING_WIDTH_REL = 0.12
_RING_CORE = 0.45
_AIRY_PERIOD_PX = 8.0
_AIRY_DECAY = 0.55

# Patterns fade to zero over rho in [_TAPER_LO, _TAPER_HI] so the particle
# blends smoothly into the background inside its 2-radius footprint.
_TAPER_LO = 1.4
_TAPER_HI = 1.75


def _taper(rho: np.ndarray) -> np.ndarray:
    w = np.clip((rho - _TAPER_LO) / (_TAPER_HI - _TAPER_LO), 0.0, 1.0)
    return 0.5 * (1.0 + np.cos(np.pi * w))


def _spot_profile(rho: np.ndarray, radius: float) -> np.ndarray:
    """Bright core with a soft dark rim, like a brightfield bead image."""
    rim_sigma = min(_RIM_WIDTH_REL, _RIM_WIDTH_MAX_PX / radius)
    core = np.exp(-(rho**2) / (2.0 * _SPOT_CORE_SIGMA**2))
    rim = -_SPOT_RIM_DEPTH * np.exp(-((rho - _SPOT_RIM_POS) ** 2) / (2.0 * rim_sigma**2))
    return core + rim


def _ring_profile(rho: np.ndarray, radius: float) -> np.ndarray:
    """Bright ring at the particle radius with a dark core."""
    ridge_sigma = min(_RING_WIDTH_REL, _RIM_WIDTH_MAX_PX / radius)
    ridge = np.exp(-((rho - 1.0) ** 2) / (2.0 * ridge_sigma**2))
    core = -0.6 * np.exp(-((rho / _RING_CORE) ** 2))
    return ridge + core


def _airy_profile(rho: np.ndarray, radius: float) -> np.ndarray:
    """Damped oscillation with a fixed ring period in pixels."""
    return np.cos(2.0 * np.pi * rho * radius / _AIRY_PERIOD_PX) * np.exp(-rho / _AIRY_DECAY)


PATTERNS: dict[str, Callable[[np.ndarray, float], np.ndarray]] = {
    "spot": _spot_profile,
    "ring": _ring_profile,
    "airy": _airy_profile,
}

BUILTIN_PATTERNS = ("spot", "ring", "airy")


def register_pattern(name: str, profile: Callable[[np.ndarray, float], np.ndarray]) -> None:
    """Add a radial profile (called as profile(rho, radius_px)) to the registry."""
    PATTERNS[name] = profile


def load_radial_profile(path, name: str | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """Load a user radial profile from CSV and optionally register it.

    The file must have a header row ``r_normalized,intensity_offset``; radii
    are in [0, 1] (mapped to [0, particle radius]) and offsets in [-1, 1].
    Beyond r_normalized = 1 the profile is zero.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["r_normalized", "intensity_offset"]:
            raise ValueError(f"{path}: expected header 'r_normalized,intensity_offset'")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two profile samples")
    r = np.array([p[0] for p in rows])
    v = np.array([p[1] for p in rows])
    if np.any(np.diff(r) <= 0):
        raise ValueError(f"{path}: r_normalized must be strictly increasing")
    if r[0] < 0.0 or r[-1] > 1.0:
        raise ValueError(f"{path}: r_normalized must lie in [0, 1]")
    if np.any(np.abs(v) > 1.0):
        raise ValueError(f"{path}: intensity_offset must lie in [-1, 1]")

    def profile(rho: np.ndarray, radius: float) -> np.ndarray:
        return np.interp(rho, r, v, left=v[0], right=0.0)

    if name is not None:
        register_pattern(name, profile)
    return profile


@dataclass(frozen=True)
class ParticleSpec:
    """Ground-truth description of one synthetic particle."""

    radius: int
    true_center: Point
    pattern: str = "spot"
    background: float = 0.5
    inverted: bool = False
    scale: float = 1.0
    stretch_x: float = 1.0
    stretch_y: float = 1.0

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if not 0.25 <= self.background <= 0.75:
            raise ValueError(f"background must lie in [0.25, 0.75], got {self.background}")
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown pattern {self.pattern!r}; known: {sorted(PATTERNS)}")
        if min(self.scale, self.stretch_x, self.stretch_y) <= 0:
            raise ValueError("scale and stretch factors must be positive")


def render_particle(spec: ParticleSpec, size: int) -> np.ndarray:
    """Render a noise-free frame: uniform background plus the radial pattern.

    Subpixel placement uses 4-sample supersampling per pixel (samples at
    +-0.25 pixel offsets of each pixel center).  Raises GeometryError when
    the particle center is closer than two radii to any border.
    """
    cx, cy = spec.true_center
    r = float(spec.radius)
    margin = 2.0 * r
    if not (margin <= cx <= size - 1 - margin and margin <= cy <= size - 1 - margin):
        raise GeometryError(
            f"particle at ({cx:.2f}, {cy:.2f}) with radius {spec.radius} "
            f"must stay {margin:.0f} px from every border of a {size}x{size} frame"
        )

    img = np.full((size, size), spec.background, dtype=np.float64)
    profile = PATTERNS[spec.pattern]
    r_eff = r * spec.scale
    rx = r_eff * spec.stretch_x
    ry = r_eff * spec.stretch_y

    reach = _TAPER_HI * max(rx, ry) + 1.0
    x0 = max(0, int(math.floor(cx - reach)))
    x1 = min(size - 1, int(math.ceil(cx + reach)))
    y0 = max(0, int(math.floor(cy - reach)))
    y1 = min(size - 1, int(math.ceil(cy + reach)))

    xs = np.arange(x0, x1 + 1, dtype=np.float64)
    ys = np.arange(y0, y1 + 1, dtype=np.float64)
    acc = np.zeros((ys.size, xs.size))
    for dy in (-0.25, 0.25):
        for dx in (-0.25, 0.25):
            u = (xs + dx - cx) / rx
            v = (ys + dy - cy) / ry
            rho = np.sqrt(u[None, :] ** 2 + v[:, None] ** 2)
            acc += profile(rho, r_eff) * _taper(rho)
    acc *= 0.25

    amp = min(spec.background, 1.0 - spec.background)
    patch = spec.background + amp * acc
    if spec.inverted:
        patch = 2.0 * spec.background - patch
    img[y0 : y1 + 1, x0 : x1 + 1] = patch
    return np.clip(img, 0.0, 1.0)


def add_noise(image: np.ndarray, snr: float, seed) -> tuple[np.ndarray, float]:
    """Add zero-mean Gaussian noise targeting the given SNR.

    Sigma is computed from the contrast of the input image (assumed noise
    free), the result is clamped to [0, 1], and the same seed always yields
    the same noise field.  ``seed`` may be an int or a ``SeedSequence``.
    Returns (noisy image, sigma).
    """
    if not snr > 0:
        raise ValueError(f"snr must be positive, got {snr}")
    arr = np.asarray(image, dtype=np.float64)
    contrast = float(arr.max() - arr.min())
    if contrast == 0.0:
        raise ValueError("degenerate contrast: image has no intensity range")
    if math.isinf(snr):
        return arr.copy(), 0.0
    sigma = contrast / (4.0 * (snr + 1.0))
    rng = np.random.Generator(np.random.PCG64(_as_seed_sequence(seed)))
    noisy = np.clip(arr + rng.normal(0.0, sigma, arr.shape), 0.0, 1.0)
    return noisy, sigma


def _as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


@dataclass(frozen=True)
class TrialConfig:
    """Configuration for one randomized localization trial."""

    radius: int
    snr: float
    image_size: int = 512
    seed: int = 0
    initial_error_max: float = 2.0
    patterns: tuple[str, ...] = BUILTIN_PATTERNS

    def __post_init__(self):
        if not self.snr > 0:
            raise ValueError(f"snr must be positive, got {self.snr}")
        if self.image_size < 4 * self.radius + 16:
            raise ValueError(
                f"image_size {self.image_size} too small for radius {self.radius}; "
                f"need at least {4 * self.radius + 16} so the particle plus ROI fit"
            )
        if self.initial_error_max < 0:
            raise ValueError("initial_error_max must be non-negative")
        if not self.patterns:
            raise ValueError("patterns must be non-empty")


def random_particle_spec(rng: np.random.Generator, radius: int, image_size: int,
                         patterns: tuple[str, ...] = BUILTIN_PATTERNS) -> ParticleSpec:
    """Draw a randomized particle: pattern, polarity, background, shape, center.

    The draw order is fixed (pattern, inverted, background, scale, stretches,
    center x, center y) so results are stable for a given generator state.
    """
    pattern = patterns[int(rng.integers(len(patterns)))]
    inverted = bool(rng.integers(2))
    background = float(rng.uniform(0.25, 0.75))
    scale = float(rng.uniform(0.9, 1.1))
    stretch_x = float(rng.uniform(0.95, 1.05))
    stretch_y = float(rng.uniform(0.95, 1.05))
    margin = 2.0 * radius
    cx = float(rng.uniform(margin, image_size - 1 - margin))
    cy = float(rng.uniform(margin, image_size - 1 - margin))
    return ParticleSpec(
        radius=radius,
        true_center=Point(cx, cy),
        pattern=pattern,
        background=background,
        inverted=inverted,
        scale=scale,
        stretch_x=stretch_x,
        stretch_y=stretch_y,
    )


def make_trial(config: TrialConfig) -> tuple[np.ndarray, Point, Point]:
    """Generate one trial: (noisy image, true center, initial guess).

    The guess is the truth displaced by a random direction and a magnitude
    drawn uniformly from [0, initial_error_max].  Two calls with the same
    config return bit-identical results.
    """
    root = np.random.SeedSequence(int(config.seed))
    ss_draw, ss_noise = root.spawn(2)
    rng = np.random.Generator(np.random.PCG64(ss_draw))

    spec = random_particle_spec(rng, config.radius, config.image_size, config.patterns)
    clean = render_particle(spec, config.image_size)

    angle = float(rng.uniform(0.0, 2.0 * np.pi))
    mag = float(rng.uniform(0.0, config.initial_error_max))
    guess = Point(spec.true_center.x + mag * math.cos(angle),
                  spec.true_center.y + mag * math.sin(angle))

    noisy, _sigma = add_noise(clean, config.snr, ss_noise)
    return noisy, spec.true_center, guess
