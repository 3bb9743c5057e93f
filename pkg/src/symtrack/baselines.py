"""Reference detectors: centroid, circular Hough, mirror cross-correlation,
and quadrant interpolation.  All share the symmetry detector's interface:
``detect_*(image, guess, params) -> Point`` (the Hough detector is global
and takes no guess).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates, sobel

from .csym import PeakFitWarning, _argmax_toward, parabolic_peak
from .errors import BoundaryError, NoParticleError
from .image import Point, Region, crop


@dataclass(frozen=True)
class BaselineParams:
    """Shared tuning for the reference detectors.

    roi_n:            odd ROI side for the centroid / correlation detectors.
    cht_radius_range: (r_min, r_max) voting radii in pixels; required by the
                      Hough detector only.
    qi_radial_step:   polar grid radial spacing, < 1 px.
    qi_angular_step:  polar grid angular spacing in radians.
    qi_iterations:    refinement passes after the cross-correlation seed.
    band_fraction:    fraction of the ROI rows/columns averaged into the
                      1-D intensity profiles.
    """

    roi_n: int
    cht_radius_range: tuple[int, int] | None = None
    qi_radial_step: float = 0.5
    qi_angular_step: float = 2.0 * np.pi / 64.0
    qi_iterations: int = 1
    band_fraction: float = 0.2

    def __post_init__(self):
        if self.roi_n < 3 or self.roi_n % 2 == 0:
            raise ValueError(f"roi_n must be odd and >= 3, got {self.roi_n}")
        if not 0.0 < self.qi_radial_step < 1.0:
            raise ValueError(f"qi_radial_step must lie in (0, 1), got {self.qi_radial_step}")
        if not self.qi_angular_step > 0:
            raise ValueError("qi_angular_step must be positive")
        if self.qi_iterations < 1:
            raise ValueError("qi_iterations must be >= 1")
        if not 0.0 < self.band_fraction < 1.0:
            raise ValueError(f"band_fraction must lie in (0, 1), got {self.band_fraction}")
        if self.cht_radius_range is not None:
            r_min, r_max = self.cht_radius_range
            if not 0 < r_min < r_max:
                raise ValueError(f"need 0 < r_min < r_max, got {self.cht_radius_range}")


def _anchor(image: np.ndarray, guess) -> tuple[int, int]:
    height, width = image.shape
    gx_f, gy_f = float(guess[0]), float(guess[1])
    if not (0.0 <= gx_f < width and 0.0 <= gy_f < height):
        raise BoundaryError(f"guess ({gx_f:.2f}, {gy_f:.2f}) outside {width}x{height} image")
    return int(round(gx_f)), int(round(gy_f))


def detect_com(image: np.ndarray, guess, params: BaselineParams) -> Point:
    """Intensity centroid of |ROI - median(full image)|."""
    gx, gy = _anchor(image, guess)
    roi = crop(image, Region(gx, gy, params.roi_n))
    weights = np.abs(roi - np.median(image))
    total = weights.sum()
    if total == 0.0:
        raise NoParticleError("ROI is identically equal to the image median")
    half = params.roi_n // 2
    idx = np.arange(params.roi_n, dtype=np.float64)
    cx_local = (weights.sum(axis=0) * idx).sum() / total
    cy_local = (weights.sum(axis=1) * idx).sum() / total
    return Point(gx - half + cx_local, gy - half + cy_local)


def _otsu_threshold(values: np.ndarray, bins: int = 256) -> float:
    """Otsu threshold of a sample set using a fixed-bin histogram."""
    vmin = float(values.min())
    vmax = float(values.max())
    if vmax <= vmin:
        return vmax
    hist, edges = np.histogram(values, bins=bins, range=(vmin, vmax))
    p = hist.astype(np.float64) / hist.sum()
    centers = 0.5 * (edges[:-1] + edges[1:])
    w0 = np.cumsum(p)
    w1 = 1.0 - w0
    mu = np.cumsum(p * centers)
    mu_total = mu[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        between = (mu_total * w0 - mu) ** 2 / (w0 * w1)
    between[~np.isfinite(between)] = -1.0
    return float(centers[int(np.argmax(between))])


def detect_cht(image: np.ndarray, params: BaselineParams) -> Point:
    """Circular Hough transform center.

    Sobel gradients are thresholded with Otsu's method; every edge pixel
    votes along both gradient polarities at each radius of the configured
    range into a single 2-D accumulator (1 px cells).  The accumulator peak
    is refined by a center of mass over its 3x3 neighborhood.
    """
    if params.cht_radius_range is None:
        raise ValueError("cht_radius_range is required for the Hough detector")
    r_min, r_max = params.cht_radius_range
    height, width = image.shape

    grad_x = sobel(image, axis=1)
    grad_y = sobel(image, axis=0)
    mag = np.hypot(grad_x, grad_y)
    threshold = _otsu_threshold(mag)
    edge_y, edge_x = np.nonzero(mag > threshold)
    if edge_y.size == 0:
        raise NoParticleError("no edge pixels above the gradient threshold")

    m = mag[edge_y, edge_x]
    ux = grad_x[edge_y, edge_x] / m
    uy = grad_y[edge_y, edge_x] / m
    acc = np.zeros(height * width, dtype=np.int64)
    fx = edge_x.astype(np.float64)
    fy = edge_y.astype(np.float64)
    radii = np.arange(int(r_min), int(r_max) + 1, dtype=np.float64)
    # vote in radius chunks to bound the temporary coordinate arrays
    chunk = max(1, int(4_000_000 // max(1, edge_y.size)))
    for start in range(0, radii.size, chunk):
        r = radii[start : start + chunk, None]
        for sign in (1.0, -1.0):
            vx = np.rint(fx[None, :] + sign * r * ux[None, :]).astype(np.int64)
            vy = np.rint(fy[None, :] + sign * r * uy[None, :]).astype(np.int64)
            ok = (vx >= 0) & (vx < width) & (vy >= 0) & (vy < height)
            idx = vy[ok] * width + vx[ok]
            acc += np.bincount(idx, minlength=height * width)
    acc = acc.reshape(height, width)

    peak_y, peak_x = np.unravel_index(int(np.argmax(acc)), acc.shape)
    y0 = max(0, peak_y - 1)
    y1 = min(height, peak_y + 2)
    x0 = max(0, peak_x - 1)
    x1 = min(width, peak_x + 2)
    window = acc[y0:y1, x0:x1].astype(np.float64)
    total = window.sum()
    ys, xs = np.mgrid[y0:y1, x0:x1]
    return Point(float((xs * window).sum() / total), float((ys * window).sum() / total))


def _band_limits(n: int, band_fraction: float) -> tuple[int, int]:
    lo = int(round(n * (0.5 - 0.5 * band_fraction)))
    hi = int(round(n * (0.5 + 0.5 * band_fraction)))
    lo = max(0, min(lo, n - 1))
    hi = max(lo, min(hi, n - 1))
    return lo, hi


def mirror_correlation(profile: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cross-correlation of a profile with its own mirror, via FFT.

    The transform length is padded to twice the profile length so the
    circular product equals the linear correlation.  Returns (lags, values)
    for integer lags -(n-1)..(n-1); for a profile symmetric about position
    c the peak sits at lag 2*c - (n-1), i.e. the center is displaced by
    half the peak lag from the profile midpoint.
    """
    p = np.asarray(profile, dtype=np.float64)
    n = p.size
    padded = 2 * n
    spec = np.fft.rfft(p, padded) * np.conj(np.fft.rfft(p[::-1], padded))
    circ = np.fft.irfft(spec, padded)
    values = np.concatenate([circ[padded - (n - 1) :], circ[:n]])
    lags = np.arange(-(n - 1), n, dtype=np.float64)
    return lags, values


def _mirror_peak_offset(profile: np.ndarray) -> float:
    """Displacement of a profile's symmetry center from its midpoint, in samples."""
    span = float(profile.max() - profile.min())
    if span <= 1e-12 * max(1.0, float(np.abs(profile).max())):
        raise NoParticleError("flat intensity profile")
    lags, values = mirror_correlation(profile)
    k = _argmax_toward(values, lags, 0.0)
    half = min(2, k, values.size - 1 - k)
    if half == 0:
        warnings.warn("mirror-correlation peak at lag range edge", PeakFitWarning, stacklevel=2)
        return float(lags[k]) / 2.0
    sel = slice(k - half, k + half + 1)
    return parabolic_peak(values[sel], lags[sel]) / 2.0


def detect_xcorr(image: np.ndarray, guess, params: BaselineParams) -> Point:
    """Mirror cross-correlation of band-averaged intensity profiles.

    The ROI is background-corrected as |ROI - median(full image)|, averaged
    over a central band of rows (columns) into a 1-D profile per axis, and
    each profile is correlated with its own mirror; a 5-point parabolic fit
    of the correlation peak gives the center at half the peak lag from the
    ROI midpoint.
    """
    gx, gy = _anchor(image, guess)
    n = params.roi_n
    roi = crop(image, Region(gx, gy, n))
    corrected = np.abs(roi - np.median(image))
    lo, hi = _band_limits(n, params.band_fraction)
    profile_x = corrected[lo : hi + 1, :].mean(axis=0)
    profile_y = corrected[:, lo : hi + 1].mean(axis=1)
    offset_x = _mirror_peak_offset(profile_x)
    offset_y = _mirror_peak_offset(profile_y)
    return Point(gx + offset_x, gy + offset_y)


def _quadrant_profiles(image: np.ndarray, center: Point, params: BaselineParams):
    """Radial mean-intensity profiles of the four quadrants around a center.

    Samples lie on a polar grid (radial spacing qi_radial_step out to the
    ROI half-width, angular spacing qi_angular_step per quadrant) and are
    read with bilinear interpolation.  Returns (q_tr, q_br, q_tl, q_bl),
    each one value per radius.  Top means toward smaller y.
    """
    height, width = image.shape
    r_max = (params.roi_n - 1) / 2.0
    step = params.qi_radial_step
    n_radii = int(math.floor(r_max / step - 0.5)) + 1
    if n_radii < 2:
        raise ValueError("polar grid needs at least 2 radii; increase roi_n or decrease qi_radial_step")
    radii = (np.arange(n_radii) + 0.5) * step
    n_angles = max(1, int(round((np.pi / 2.0) / params.qi_angular_step)))
    angles = (np.arange(n_angles) + 0.5) * (np.pi / 2.0) / n_angles

    reach = radii[-1]
    if center.x - reach < 0 or center.x + reach > width - 1 or center.y - reach < 0 or center.y + reach > height - 1:
        raise BoundaryError(
            f"polar grid of reach {reach:.1f} px around ({center.x:.2f}, {center.y:.2f}) exits the image"
        )

    dx = np.outer(radii, np.cos(angles))
    dy = np.outer(radii, np.sin(angles))
    profiles = []
    for sign_x, sign_y in ((1.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (-1.0, 1.0)):
        xs = center.x + sign_x * dx
        ys = center.y + sign_y * dy
        vals = map_coordinates(image, [ys.ravel(), xs.ravel()], order=1)
        profiles.append(vals.reshape(dx.shape).mean(axis=1))
    return tuple(profiles)


def _qi_axis_offset(corrected: np.ndarray, center: Point, params: BaselineParams, axis: str) -> float:
    q_tr, q_br, q_tl, q_bl = _quadrant_profiles(corrected, center, params)
    if axis == "x":
        near = q_tl + q_bl  # toward smaller x
        far = q_tr + q_br
    else:
        near = q_tl + q_tr  # toward smaller y
        far = q_bl + q_br
    profile = np.concatenate([near[::-1], far])
    return _mirror_peak_offset(profile) * params.qi_radial_step


def qi_refine(image: np.ndarray, center: Point, params: BaselineParams) -> Point:
    """One quadrant-interpolation pass: correct x, then y, from the given center.

    The polar profiles sample the background-corrected image |I - median(I)|
    (the same correction the cross-correlation stage uses), so the refinement
    is invariant under affine intensity changes.
    """
    corrected = np.abs(image - np.median(image))
    cx = center.x + _qi_axis_offset(corrected, center, params, "x")
    refined = Point(cx, center.y)
    cy = refined.y + _qi_axis_offset(corrected, refined, params, "y")
    return Point(cx, cy)


def detect_qi(image: np.ndarray, guess, params: BaselineParams) -> Point:
    """Quadrant interpolation: cross-correlation seed plus polar-grid refinement."""
    estimate = detect_xcorr(image, guess, params)
    for _ in range(params.qi_iterations):
        estimate = qi_refine(image, estimate, params)
    return estimate
