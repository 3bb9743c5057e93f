"""Core image, geometry, and statistics primitives.

A grayscale image is a 2-D float64 numpy array with intensities in [0, 1],
indexed ``image[y, x]``.  The coordinate convention used everywhere in this
package is: (0, 0) is the center of the top-left pixel, x grows rightward
along columns, y grows downward along rows.  Subpixel positions are plain
(x, y) float pairs.
"""

import math
from typing import NamedTuple

import numpy as np

from .errors import BoundaryError


class Point(NamedTuple):
    """Subpixel position in pixel coordinates."""

    x: float
    y: float


class Region(NamedTuple):
    """Square region of interest: integer center pixel and odd side length."""

    cx: int
    cy: int
    n: int


def as_image(data) -> np.ndarray:
    """Validate and convert array-like data to a grayscale image.

    Raises ValueError if the data is not 2-D, contains non-finite samples,
    or has intensities outside [0, 1].
    """
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {img.shape}")
    if img.size == 0:
        raise ValueError("image is empty")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite samples")
    lo, hi = float(img.min()), float(img.max())
    if lo < 0.0 or hi > 1.0:
        raise ValueError(f"intensities outside [0, 1]: min={lo}, max={hi}")
    return img


def region_slices(region: Region) -> tuple[slice, slice]:
    """Row/column slices covered by a region (no bounds check)."""
    _check_region(region)
    half = region.n // 2
    return (
        slice(region.cy - half, region.cy + half + 1),
        slice(region.cx - half, region.cx + half + 1),
    )


def _check_region(region: Region) -> None:
    n = region.n
    if n < 3:
        raise ValueError(f"region side must be >= 3, got {n}")
    if n % 2 == 0:
        raise ValueError(f"region side must be odd so the ROI has a center pixel, got {n}")


def check_region_fits(region: Region, width: int, height: int) -> None:
    """Raise BoundaryError naming the offending edge if the crop does not fit."""
    _check_region(region)
    half = region.n // 2
    if region.cx - half < 0:
        raise BoundaryError(f"region extends past the left edge (x0={region.cx - half})")
    if region.cy - half < 0:
        raise BoundaryError(f"region extends past the top edge (y0={region.cy - half})")
    if region.cx + half > width - 1:
        raise BoundaryError(f"region extends past the right edge (x1={region.cx + half}, width={width})")
    if region.cy + half > height - 1:
        raise BoundaryError(f"region extends past the bottom edge (y1={region.cy + half}, height={height})")


def crop(image: np.ndarray, region: Region) -> np.ndarray:
    """Extract an n-by-n sub-image around the region center.

    The source image is left unmodified; the crop is an independent copy.
    Raises BoundaryError if any edge of the region falls outside the image.
    """
    height, width = image.shape
    check_region_fits(region, width, height)
    rows, cols = region_slices(region)
    return image[rows, cols].copy()


def euclidean_error(estimate, truth) -> float:
    """Euclidean distance in pixels between two subpixel positions."""
    ex, ey = float(estimate[0]), float(estimate[1])
    tx, ty = float(truth[0]), float(truth[1])
    if not all(math.isfinite(v) for v in (ex, ey, tx, ty)):
        raise ValueError("positions must be finite")
    return math.hypot(ex - tx, ey - ty)


def measure_snr(image: np.ndarray, noise_sigma: float) -> float:
    """Signal-to-noise ratio of an image for a known noise standard deviation.

    Defined as the intensity range over four noise standard deviations,
    minus one: (I_max - I_min) / (4 * sigma) - 1.
    """
    if not noise_sigma > 0:
        raise ValueError(f"noise_sigma must be positive, got {noise_sigma}")
    arr = np.asarray(image, dtype=np.float64)
    return float((arr.max() - arr.min()) / (4.0 * noise_sigma) - 1.0)
