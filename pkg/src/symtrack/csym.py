"""Subpixel particle detector based on mirror-symmetry correlation.

Pipeline, per candidate center on an integer search grid around the initial
guess:

1. Extract an odd n-by-n ROI and build four templates by mirroring each
   half of the ROI about its center column (left/right) and center row
   (top/bottom).  The shared center column/row belongs to both halves.
2. Correlate opposing template pairs with a zero-mean, unit-variance
   normalized product, giving two correlation maps over the search grid
   (values in [-1, 1]; a map entry is 1 when the ROI is perfectly symmetric
   about that candidate's axis).
3. Average each map along the other axis, reducing it to two 1-D symmetry
   profiles (one per axis).
4. Optionally upsample each profile with piecewise cubic Hermite
   interpolation (tangents by centered differences, one-sided at the ends).
5. Fit a 2nd-degree polynomial around the discrete peak of the (upsampled)
   profile via a Vandermonde least-squares system; the parabola vertex is
   the subpixel center coordinate for that axis.

A 3x3 median prefilter of each candidate ROI can be switched on for very
noisy data; Hermite interpolation can be switched off to save time (the
parabola then uses 5 discrete profile samples around the peak).
"""

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.ndimage import median_filter

from .errors import BoundaryError, NoParticleError
from .image import Point, Region, crop


class PeakFitWarning(UserWarning):
    """Raised when a peak fit falls back to a degraded estimate."""


@dataclass(frozen=True)
class CsymParams:
    """Tuning parameters for the symmetry detector.

    roi_n:                odd template side length; slightly larger than the
                          particle diameter works well (e.g. 2.5x radius).
    search_half:          half-width of the candidate grid; the grid is
                          (2*search_half+1)^2 integer points around the guess.
    use_hermite:          upsample symmetry profiles before the peak fit.
    use_median_prefilter: 3x3 median filter each candidate ROI first.
    median_window:        odd median window size.
    peak_fit_span:        number of interpolated samples used by the parabola
                          fit around the profile peak.
    peak_sample_step:     spacing of interpolated samples, in pixels.
    """

    roi_n: int
    search_half: int = 5
    use_hermite: bool = True
    use_median_prefilter: bool = False
    median_window: int = 3
    peak_fit_span: int = 500
    peak_sample_step: float = 0.01

    def __post_init__(self):
        if self.roi_n < 5 or self.roi_n % 2 == 0:
            raise ValueError(f"roi_n must be odd and >= 5, got {self.roi_n}")
        if self.search_half < 1:
            raise ValueError(f"search_half must be >= 1, got {self.search_half}")
        if self.median_window < 1 or self.median_window % 2 == 0:
            raise ValueError(f"median_window must be odd and >= 1, got {self.median_window}")
        if not self.peak_sample_step > 0:
            raise ValueError("peak_sample_step must be positive")
        if self.peak_fit_span < 3:
            raise ValueError("peak_fit_span must be >= 3")


class CorrelationMaps(NamedTuple):
    """Per-axis symmetry correlation over the search grid, indexed [iy, ix]."""

    corr_x: np.ndarray
    corr_y: np.ndarray
    degenerate_x: np.ndarray
    degenerate_y: np.ndarray


class SymmetryProfiles(NamedTuple):
    """Axis-collapsed symmetry profiles (one value per candidate column/row)."""

    sym_x: np.ndarray
    sym_y: np.ndarray


def extract_templates(image: np.ndarray, candidate: tuple[int, int], n: int):
    """Four mirror templates of the n-by-n ROI around an integer candidate.

    Returns (t_left, t_right, t_top, t_bottom).  t_left is the ROI's left
    half (including the center column) mirrored out to full width, so it is
    symmetric about the center column by construction; the others follow the
    same scheme for the right half and the top/bottom halves.
    """
    roi = crop(image, Region(int(candidate[0]), int(candidate[1]), n))
    return _split_templates(roi)


def _split_templates(roi: np.ndarray):
    c = roi.shape[0] // 2
    left = roi[:, : c + 1]
    right = roi[:, c:]
    top = roi[: c + 1, :]
    bottom = roi[c:, :]
    t_left = np.concatenate([left, left[:, c - 1 :: -1]], axis=1)
    t_right = np.concatenate([right[:, :0:-1], right], axis=1)
    t_top = np.concatenate([top, top[c - 1 :: -1, :]], axis=0)
    t_bottom = np.concatenate([bottom[:0:-1, :], bottom], axis=0)
    return t_left, t_right, t_top, t_bottom


def _ncc(a: np.ndarray, b: np.ndarray) -> tuple[float, bool]:
    """Normalized correlation of two equal-size templates; flags zero variance."""
    sa = a.std()
    sb = b.std()
    if sa == 0.0 or sb == 0.0:
        return 0.0, True
    val = ((a - a.mean()) * (b - b.mean())).mean() / (sa * sb)
    return float(val), False


def correlation_maps(image: np.ndarray, guess: tuple[int, int], params: CsymParams) -> CorrelationMaps:
    """Evaluate both symmetry correlations at every candidate of the search grid.

    Candidates run over x in [gx-h, gx+h] and y in [gy-h, gy+h] with
    h = search_half; maps are indexed [iy, ix].  Zero-variance candidates are
    stored as 0 and flagged in the degenerate masks.  Raises BoundaryError if
    any candidate ROI leaves the image.
    """
    gx, gy = int(guess[0]), int(guess[1])
    h = params.search_half
    half_roi = params.roi_n // 2
    height, width = image.shape
    reach = h + half_roi
    if gx - reach < 0:
        raise BoundaryError(f"search area extends past the left edge (x0={gx - reach})")
    if gy - reach < 0:
        raise BoundaryError(f"search area extends past the top edge (y0={gy - reach})")
    if gx + reach > width - 1:
        raise BoundaryError(f"search area extends past the right edge (x1={gx + reach}, width={width})")
    if gy + reach > height - 1:
        raise BoundaryError(f"search area extends past the bottom edge (y1={gy + reach}, height={height})")

    size = 2 * h + 1
    corr_x = np.zeros((size, size))
    corr_y = np.zeros((size, size))
    degen_x = np.zeros((size, size), dtype=bool)
    degen_y = np.zeros((size, size), dtype=bool)
    for iy in range(size):
        cy = gy - h + iy
        for ix in range(size):
            cx = gx - h + ix
            roi = image[cy - half_roi : cy + half_roi + 1, cx - half_roi : cx + half_roi + 1]
            if params.use_median_prefilter:
                # mode="nearest" replicates the ROI edge rows/columns
                roi = median_filter(roi, size=params.median_window, mode="nearest")
            t_left, t_right, t_top, t_bottom = _split_templates(roi)
            corr_x[iy, ix], degen_x[iy, ix] = _ncc(t_left, t_right)
            corr_y[iy, ix], degen_y[iy, ix] = _ncc(t_top, t_bottom)
    return CorrelationMaps(corr_x, corr_y, degen_x, degen_y)


def symmetry_profiles(corr_x: np.ndarray, corr_y: np.ndarray) -> SymmetryProfiles:
    """Collapse correlation maps to 1-D profiles by averaging over the other axis."""
    if corr_x.shape != corr_y.shape or corr_x.shape[0] != corr_x.shape[1]:
        raise ValueError(f"correlation maps must be square and same shape, got {corr_x.shape} and {corr_y.shape}")
    return SymmetryProfiles(corr_x.mean(axis=0), corr_y.mean(axis=1))


def tangent_slopes(profile: np.ndarray) -> np.ndarray:
    """Knot tangents: centered differences inside, one-sided at the ends."""
    y = np.asarray(profile, dtype=np.float64)
    m = np.empty_like(y)
    m[1:-1] = 0.5 * (y[2:] - y[:-2])
    m[0] = y[1] - y[0]
    m[-1] = y[-1] - y[-2]
    return m


def hermite_evaluate(profile: np.ndarray, positions: np.ndarray,
                     slopes: np.ndarray | None = None) -> np.ndarray:
    """Evaluate the piecewise cubic Hermite interpolant of a profile.

    Knots sit at integer positions 0..len(profile)-1.  On each unit segment
    the cubic is

        (2t^3 - 3t^2 + 1) y_k + (t^3 - 2t^2 + t) m_k
      + (-2t^3 + 3t^2) y_{k+1} + (t^3 - t^2) m_{k+1}

    which passes through every knot with a continuous first derivative.
    """
    y = np.asarray(profile, dtype=np.float64)
    if y.ndim != 1 or y.size < 3:
        raise ValueError(f"profile must be 1-D with at least 3 knots, got shape {y.shape}")
    m = tangent_slopes(y) if slopes is None else np.asarray(slopes, dtype=np.float64)
    pos = np.asarray(positions, dtype=np.float64)
    seg = np.clip(np.floor(pos).astype(int), 0, y.size - 2)
    t = pos - seg
    t2 = t * t
    t3 = t2 * t
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + t
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return h00 * y[seg] + h10 * m[seg] + h01 * y[seg + 1] + h11 * m[seg + 1]


def hermite_interpolate(profile: np.ndarray, step: float = 0.01) -> tuple[np.ndarray, np.ndarray]:
    """Sample the Hermite interpolant on a uniform grid of the given spacing.

    Returns (positions, values) spanning the full profile domain.
    """
    y = np.asarray(profile, dtype=np.float64)
    if y.ndim != 1 or y.size < 3:
        raise ValueError(f"profile must be 1-D with at least 3 knots, got shape {y.shape}")
    if not step > 0:
        raise ValueError("step must be positive")
    count = int(round((y.size - 1) / step))
    positions = np.linspace(0.0, float(y.size - 1), count + 1)
    return positions, hermite_evaluate(y, positions)


def _argmax_toward(values: np.ndarray, positions: np.ndarray, center: float) -> int:
    """Index of the maximum; ties go to the position nearest center, then lowest index."""
    peak = values.max()
    tied = np.flatnonzero(values == peak)
    if tied.size == 1:
        return int(tied[0])
    order = np.lexsort((tied, np.abs(positions[tied] - center)))
    return int(tied[order[0]])


def parabolic_peak(samples: np.ndarray, positions: np.ndarray) -> float:
    """Vertex of a least-squares parabola through peak-bracketing samples.

    The quadratic q1*x^2 + q2*x + q3 is fit over all given samples through a
    Vandermonde system; the returned peak is -q2 / (2*q1).  Degraded cases
    fall back to the discrete maximum position with a PeakFitWarning: a
    discrete peak sitting at either end of the span, or a fit that is not
    concave (q1 >= 0).
    """
    vals = np.asarray(samples, dtype=np.float64)
    pos = np.asarray(positions, dtype=np.float64)
    if vals.size != pos.size or vals.size < 3:
        raise ValueError("need at least 3 samples with matching positions")
    k = int(np.argmax(vals))
    if k == 0 or k == vals.size - 1:
        warnings.warn("discrete peak at span edge; returning edge position", PeakFitWarning, stacklevel=2)
        return float(pos[k])
    shift = pos[k]
    z = pos - shift
    vand = np.column_stack([z * z, z, np.ones_like(z)])
    q, *_ = np.linalg.lstsq(vand, vals, rcond=None)
    if not q[0] < 0:
        warnings.warn("no concave peak (q1 >= 0); returning discrete maximum", PeakFitWarning, stacklevel=2)
        return float(pos[k])
    return float(shift - q[1] / (2.0 * q[0]))


def _profile_peak(profile: np.ndarray, params: CsymParams) -> float:
    """Subpixel peak of one symmetry profile, in profile coordinates."""
    n = profile.size
    center = 0.5 * (n - 1)
    if params.use_hermite:
        positions, values = hermite_interpolate(profile, params.peak_sample_step)
        k = _argmax_toward(values, positions, center)
        last = values.size - 1
        left = min((params.peak_fit_span - 1) // 2, k)
        right = min(params.peak_fit_span // 2, last - k)
        if left == 0 or right == 0:
            warnings.warn("profile peak at search-area edge", PeakFitWarning, stacklevel=2)
            return float(positions[k])
        if left < (params.peak_fit_span - 1) // 2 or right < params.peak_fit_span // 2:
            # near an edge the span shrinks to the symmetric maximum
            left = right = min(left, right)
            warnings.warn("peak-fit span truncated at search-area edge", PeakFitWarning, stacklevel=2)
        return parabolic_peak(values[k - left : k + right + 1], positions[k - left : k + right + 1])

    k = _argmax_toward(profile, np.arange(n, dtype=np.float64), center)
    half = min(2, k, n - 1 - k)
    if half == 0:
        warnings.warn("profile peak at search-area edge", PeakFitWarning, stacklevel=2)
        return float(k)
    idx = np.arange(k - half, k + half + 1)
    return parabolic_peak(profile[idx], idx.astype(np.float64))


def detect(image: np.ndarray, guess, params: CsymParams) -> Point:
    """Locate the particle center near an initial guess.

    The guess is rounded to the nearest integer pixel to anchor the search
    grid.  Raises BoundaryError when the guess or its search geometry leaves
    the image, and NoParticleError when a whole correlation map is
    degenerate (e.g. a constant image).
    """
    height, width = image.shape
    gx_f, gy_f = float(guess[0]), float(guess[1])
    if not (0.0 <= gx_f < width and 0.0 <= gy_f < height):
        raise BoundaryError(f"guess ({gx_f:.2f}, {gy_f:.2f}) outside {width}x{height} image")
    gx, gy = int(round(gx_f)), int(round(gy_f))

    maps = correlation_maps(image, (gx, gy), params)
    if maps.degenerate_x.all() or maps.degenerate_y.all():
        raise NoParticleError("all search candidates have zero template variance")
    profiles = symmetry_profiles(maps.corr_x, maps.corr_y)
    px = _profile_peak(profiles.sym_x, params)
    py = _profile_peak(profiles.sym_y, params)
    return Point(gx - params.search_half + px, gy - params.search_half + py)
