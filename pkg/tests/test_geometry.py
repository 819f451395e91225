import math

import numpy as np
import pytest

from app.core.errors import InvalidParameterError
from app.core.geometry import elastic, rotate_expand, rotated_canvas, scale_down, shear_horizontal, shift
from app.core.raster import GrayImage, resize_height
from utils.rng import RngStream


@pytest.mark.parametrize("angle", [1.5, -1.5, 2, -2, 5, -5, 10, -10])
@pytest.mark.parametrize("size", [(100, 20), (1362, 64), (7, 7)])
def test_rotated_canvas_is_ceil_bounding_box(angle, size):
    w, h = size
    t = math.radians(angle)
    expected_w = math.ceil(w * abs(math.cos(t)) + h * abs(math.sin(t)) - 1e-9)
    expected_h = math.ceil(w * abs(math.sin(t)) + h * abs(math.cos(t)) - 1e-9)
    out = rotate_expand(GrayImage.blank(w, h, 200), angle)
    assert (out.width, out.height) == (expected_w, expected_h) == rotated_canvas(w, h, angle)


def test_rotated_canvas_known_value():
    assert rotated_canvas(100, 20, 10) == (102, 38)


def test_rotate_zero_is_identity(line_image):
    assert rotate_expand(line_image, 0) == line_image


def test_positive_angle_turns_counter_clockwise():
    pixels = np.zeros((21, 21), dtype=np.uint8)
    pixels[10, 15] = 255
    out = rotate_expand(GrayImage(pixels), 30)
    y, x = np.unravel_index(np.argmax(out.pixels), out.pixels.shape)
    centre = (out.width - 1) / 2
    assert x > centre and y < centre


def test_rotation_shrinks_content_after_height_normalisation():
    rotated = rotate_expand(GrayImage.blank(100, 20, 255), 10)
    normalised = resize_height(rotated, 64)
    column = normalised.pixels[:, normalised.width // 2]
    bright = int((column >= 128).sum())
    assert 32 <= bright <= 64 * 20 / 37 + 1


def test_rotation_limit():
    with pytest.raises(InvalidParameterError):
        rotate_expand(GrayImage.blank(5, 5), 46)


def test_integer_shift_matches_slicing():
    gen = np.random.default_rng(3)
    for _ in range(200):
        h, w = gen.integers(2, 17, size=2)
        pixels = gen.integers(0, 256, size=(h, w)).astype(np.uint8)
        dx, dy = int(gen.integers(-w + 1, w)), int(gen.integers(-h + 1, h))
        expected = np.zeros_like(pixels)
        for y in range(h):
            for x in range(w):
                sx, sy = x - dx, y - dy
                if 0 <= sx < w and 0 <= sy < h:
                    expected[y, x] = pixels[sy, sx]
        assert np.array_equal(shift(GrayImage(pixels), dx, dy).pixels, expected)


def test_shift_bounds_and_identity(line_image):
    assert shift(line_image, 0, 0) is line_image
    with pytest.raises(InvalidParameterError):
        shift(line_image, line_image.width, 0)
    with pytest.raises(InvalidParameterError):
        shift(line_image, 0, -line_image.height)


@pytest.mark.parametrize("angle", [30, -30, 5, -5])
def test_shear_grows_width_and_keeps_reference_row(angle, line_image):
    out = shear_horizontal(line_image, angle)
    extra = math.ceil(line_image.height * abs(math.tan(math.radians(angle))))
    assert out.width == line_image.width + extra
    assert out.height == line_image.height
    ref = line_image.height - 1 if angle > 0 else 0
    assert np.array_equal(out.pixels[ref, :line_image.width], line_image.pixels[ref])


def test_shear_limit(line_image):
    with pytest.raises(InvalidParameterError):
        shear_horizontal(line_image, 60)


def test_scale_down_pads_vertically():
    out = scale_down(GrayImage.blank(100, 20, 255), 0.75)
    assert (out.width, out.height) == (75, 20)
    assert out.pixels[:2].max() == 0 and out.pixels[17:].max() == 0
    assert out.pixels[2:17].min() == 255


def test_scale_down_bounds(line_image):
    assert scale_down(line_image, 1.0) is line_image
    with pytest.raises(InvalidParameterError):
        scale_down(line_image, 0)
    with pytest.raises(InvalidParameterError):
        scale_down(line_image, 1.2)


def test_elastic_is_seeded(line_image):
    a = elastic(line_image, 18, 6, RngStream(5).child("x"))
    b = elastic(line_image, 18, 6, RngStream(5).child("x"))
    c = elastic(line_image, 18, 6, RngStream(6).child("x"))
    assert a == b
    assert a != c
    assert (a.width, a.height) == (line_image.width, line_image.height)


def test_elastic_parameters(line_image, rng):
    assert elastic(line_image, 0, 6, rng) is line_image
    with pytest.raises(InvalidParameterError):
        elastic(line_image, 18, 0, rng)
    with pytest.raises(InvalidParameterError):
        elastic(line_image, -1, 5, rng)
