import math

import numpy as np
import pytest

from app.core.errors import InvalidParameterError
from app.core.intensity import gaussian_blur, gaussian_noise, gaussian_taps, mask_columns, pixel_dropout
from app.core.raster import GrayImage
from utils.rng import RngStream


@pytest.mark.parametrize("width,rate,count", [(100, 0.10, 10), (100, 0.40, 40), (10, 0.25, 3), (10, 0.0, 0)])
def test_mask_columns_exact_count(width, rate, count, rng):
    img = GrayImage.blank(width, 4, 255)
    out, columns = mask_columns(img, rate, rng)
    assert len(columns) == len(set(columns.tolist())) == count
    zero_columns = np.flatnonzero(out.pixels.max(axis=0) == 0)
    assert zero_columns.tolist() == sorted(columns.tolist())


def test_mask_columns_matches_oracle():
    gen = np.random.default_rng(11)
    for i in range(200):
        h, w = gen.integers(1, 17, size=2)
        pixels = gen.integers(0, 256, size=(h, w)).astype(np.uint8)
        out, columns = mask_columns(GrayImage(pixels), 0.4, RngStream(i))
        expected = pixels.copy()
        expected[:, columns] = 0
        assert np.array_equal(out.pixels, expected)


def test_mask_columns_rate_bounds(line_image, rng):
    with pytest.raises(InvalidParameterError):
        mask_columns(line_image, 1.5, rng)


def test_pixel_dropout_extremes(line_image, rng):
    assert pixel_dropout(line_image, 0.0, rng) is line_image
    assert pixel_dropout(line_image, 1.0, rng).pixels.max() == 0


def test_pixel_dropout_fraction(rng):
    out = pixel_dropout(GrayImage.blank(1000, 100, 255), 0.2, rng)
    assert abs((out.pixels == 0).mean() - 0.2) < 0.01


def test_gaussian_noise_statistics(rng):
    img = GrayImage.blank(400, 100, 128)
    out = gaussian_noise(img, 0.08, rng)
    diff = out.pixels.astype(np.float64) - 128
    assert abs(diff.mean()) < 0.5
    assert diff.std() == pytest.approx(0.08 * 255, abs=1.0)


def test_gaussian_noise_zero_sigma(line_image, rng):
    assert gaussian_noise(line_image, 0.0, rng) is line_image
    with pytest.raises(InvalidParameterError):
        gaussian_noise(line_image, -0.1, rng)


def test_gaussian_taps_closed_form():
    taps = gaussian_taps(1.0)
    norm = 1 + 2 * math.exp(-0.5) + 2 * math.exp(-2)
    assert taps[2] == pytest.approx(1 / norm)
    assert taps[2] == pytest.approx(0.4026, abs=1e-4)
    assert taps.sum() == pytest.approx(1.0)
    assert np.allclose(taps, taps[::-1])


def test_blur_preserves_constant_images_and_shape(line_image):
    assert gaussian_blur(GrayImage.blank(9, 7, 90), 1.5) == GrayImage.blank(9, 7, 90)
    out = gaussian_blur(line_image, 2.0)
    assert (out.width, out.height) == (line_image.width, line_image.height)
    assert out.pixels.max() < line_image.pixels.max()


def test_blur_sigma_must_be_positive(line_image):
    with pytest.raises(InvalidParameterError):
        gaussian_blur(line_image, 0)
