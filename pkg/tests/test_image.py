import math

import numpy as np
import pytest

from symtrack.errors import BoundaryError
from symtrack.image import Point, Region, as_image, crop, euclidean_error, measure_snr


class TestCrop:
    def test_interior_crop_shape_and_content(self, rng):
        img = rng.uniform(0.0, 1.0, (512, 512))
        out = crop(img, Region(256, 256, 65))
        assert out.shape == (65, 65)
        assert np.array_equal(out, img[224:289, 224:289])

    def test_corner_region_out_of_bounds(self, rng):
        img = rng.uniform(0.0, 1.0, (512, 512))
        with pytest.raises(BoundaryError, match="left|top"):
            crop(img, Region(0, 0, 65))

    def test_offending_edge_is_named(self, rng):
        img = rng.uniform(0.0, 1.0, (64, 64))
        with pytest.raises(BoundaryError, match="right"):
            crop(img, Region(62, 30, 11))
        with pytest.raises(BoundaryError, match="bottom"):
            crop(img, Region(30, 62, 11))

    def test_full_size_crop_is_identity(self, rng):
        img = rng.uniform(0.0, 1.0, (65, 65))
        out = crop(img, Region(32, 32, 65))
        assert np.array_equal(out, img)

    def test_crop_does_not_alias_source(self, rng):
        img = rng.uniform(0.0, 1.0, (65, 65))
        out = crop(img, Region(32, 32, 5))
        out[0, 0] = 2.0
        assert img.max() <= 1.0

    def test_even_side_rejected(self, rng):
        img = rng.uniform(0.0, 1.0, (512, 512))
        with pytest.raises(ValueError, match="odd"):
            crop(img, Region(256, 256, 64))

    def test_too_small_side_rejected(self, rng):
        img = rng.uniform(0.0, 1.0, (64, 64))
        with pytest.raises(ValueError, match=">= 3"):
            crop(img, Region(32, 32, 1))

    def test_nested_crops_compose(self, rng):
        img = rng.uniform(0.0, 1.0, (128, 128))
        for _ in range(20):
            cx, cy = int(rng.integers(30, 98)), int(rng.integers(30, 98))
            outer = crop(img, Region(cx, cy, 41))
            dx, dy = int(rng.integers(-7, 8)), int(rng.integers(-7, 8))
            inner = crop(outer, Region(20 + dx, 20 + dy, 11))
            direct = crop(img, Region(cx + dx, cy + dy, 11))
            assert np.array_equal(inner, direct)


class TestEuclideanError:
    def test_three_four_five(self):
        assert euclidean_error(Point(3.0, 4.0), Point(0.0, 0.0)) == 5.0

    def test_identical_points(self):
        assert euclidean_error(Point(1.25, -3.5), Point(1.25, -3.5)) == 0.0

    def test_half_pixel_diagonal(self):
        # hand oracle: hypot(0.5, 0.5) = sqrt(0.5)
        expected = math.hypot(0.5, 0.5)
        assert expected == pytest.approx(0.7071067811865476, abs=1e-15)
        assert euclidean_error(Point(1.5, 2.5), Point(1.0, 2.0)) == pytest.approx(expected, abs=1e-15)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            euclidean_error(Point(float("nan"), 0.0), Point(0.0, 0.0))
        with pytest.raises(ValueError):
            euclidean_error(Point(0.0, 0.0), Point(float("inf"), 0.0))

    def test_symmetry_and_triangle_inequality(self, rng):
        for _ in range(200):
            a, b, c = (Point(*rng.uniform(-50, 50, 2)) for _ in range(3))
            assert euclidean_error(a, b) == euclidean_error(b, a)
            assert euclidean_error(a, c) <= euclidean_error(a, b) + euclidean_error(b, c) + 1e-12


class TestMeasureSnr:
    def test_full_contrast_small_sigma(self):
        img = np.array([[0.0, 1.0], [0.5, 0.5]])
        assert measure_snr(img, 0.05) == pytest.approx(4.0, abs=1e-12)

    def test_boundary_value(self):
        img = np.array([[0.0, 1.0], [0.5, 0.5]])
        assert measure_snr(img, 0.25) == pytest.approx(0.0, abs=1e-12)

    def test_mid_range_contrast(self):
        # direct substitution oracle: (0.75 - 0.25) / (4 * 0.05) - 1 = 1.5
        img = np.array([[0.25, 0.75], [0.5, 0.5]])
        assert measure_snr(img, 0.05) == pytest.approx(1.5, abs=1e-12)

    def test_nonpositive_sigma_rejected(self):
        img = np.array([[0.0, 1.0]])
        with pytest.raises(ValueError):
            measure_snr(img, 0.0)
        with pytest.raises(ValueError):
            measure_snr(img, -0.1)

    def test_monotone_decreasing_in_sigma(self, rng):
        img = rng.uniform(0.0, 1.0, (16, 16))
        sigmas = np.sort(rng.uniform(0.01, 0.5, 10))
        values = [measure_snr(img, s) for s in sigmas]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestAsImage:
    def test_accepts_valid(self, rng):
        img = as_image(rng.uniform(0.0, 1.0, (4, 6)))
        assert img.dtype == np.float64

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            as_image(np.zeros(5))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="outside"):
            as_image(np.array([[0.0, 1.5]]))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            as_image(np.array([[0.0, float("nan")]]))
