"""
Geometric line-image augmentations: rotation, shift, shear, down-scaling and
elastic deformation.

Rotation and shear grow the canvas so no content is clipped. Every transform
is an inverse mapping sampled bilinearly; vacated pixels are background 0.
"""
import logging
import math

import numpy as np
from scipy import ndimage

from app.core.errors import InvalidParameterError
from app.core.raster import Anchor, GrayImage, pad_to, resize, round_half_up, sample_grid, to_uint8
from utils.rng import RngStream

logger = logging.getLogger(__name__)

MAX_ROTATION = 45.0
MAX_SHEAR = 60.0
ELASTIC_TRUNCATE = 3.0

_EPS = 1e-9


def _ceil(value: float) -> int:
    # ignore floating noise just above an integer
    return int(math.ceil(value - _EPS))


def rotated_canvas(width: int, height: int, angle: float):
    theta = math.radians(angle)
    c, s = abs(math.cos(theta)), abs(math.sin(theta))
    return _ceil(width * c + height * s), _ceil(width * s + height * c)


def rotate_expand(img: GrayImage, angle: float) -> GrayImage:
    """
    Rotate about the image centre; positive angles turn the line counter-clockwise.
    The canvas becomes the rotated bounding box and vacated pixels are black.
    """
    if abs(angle) > MAX_ROTATION:
        raise InvalidParameterError(f"Rotation angle {angle} outside +/-{MAX_ROTATION} degrees")
    new_w, new_h = rotated_canvas(img.width, img.height, angle)
    theta = math.radians(angle)
    cos_t, sin_t = math.cos(theta), math.sin(theta)

    cx, cy = (img.width - 1) / 2.0, (img.height - 1) / 2.0
    ncx, ncy = (new_w - 1) / 2.0, (new_h - 1) / 2.0
    grid_y, grid_x = np.mgrid[0:new_h, 0:new_w].astype(np.float64)
    dx, dy = grid_x - ncx, grid_y - ncy
    src_x = cos_t * dx - sin_t * dy + cx
    src_y = sin_t * dx + cos_t * dy + cy
    return GrayImage(to_uint8(sample_grid(img, src_x, src_y)))


def shift(img: GrayImage, dx: float, dy: float) -> GrayImage:
    """Translate content by (dx, dy) pixels without wraparound"""
    if abs(dx) >= img.width or abs(dy) >= img.height:
        raise InvalidParameterError(
            f"Shift ({dx}, {dy}) exceeds image size {img.width}x{img.height}"
        )
    if dx == 0 and dy == 0:
        return img
    grid_y, grid_x = np.mgrid[0:img.height, 0:img.width].astype(np.float64)
    return GrayImage(to_uint8(sample_grid(img, grid_x - dx, grid_y - dy)))


def shear_horizontal(img: GrayImage, angle: float) -> GrayImage:
    """
    Horizontal shear, x' = x + (y_ref - y) * tan(angle).
    y_ref is the bottom row for positive angles and the top row for negative
    ones, so every row moves right and the canvas only grows to the right.
    """
    if abs(angle) >= MAX_SHEAR:
        raise InvalidParameterError(f"Shear angle {angle} must be below {MAX_SHEAR} degrees")
    tan_t = math.tan(math.radians(angle))
    extra = _ceil(img.height * abs(tan_t))
    if extra == 0 and tan_t == 0:
        return img
    y_ref = img.height - 1 if tan_t >= 0 else 0
    new_w = img.width + extra
    grid_y, grid_x = np.mgrid[0:img.height, 0:new_w].astype(np.float64)
    src_x = grid_x - (y_ref - grid_y) * tan_t
    return GrayImage(to_uint8(sample_grid(img, src_x, grid_y)))


def scale_down(img: GrayImage, factor: float) -> GrayImage:
    """Shrink both axes by factor, then pad top and bottom back to the original height"""
    if not 0 < factor <= 1:
        raise InvalidParameterError(f"Scale factor must lie in (0, 1], got {factor}")
    if factor == 1:
        return img
    new_w = max(1, round_half_up(img.width * factor))
    new_h = max(1, round_half_up(img.height * factor))
    content = resize(img, new_w, new_h)
    return pad_to(content, new_w, img.height, Anchor.CENTER_VERTICAL)


def displacement_fields(shape, alpha: float, sigma: float, rng: RngStream):
    dx = ndimage.gaussian_filter(rng.uniform_field(shape), sigma, mode="constant", cval=0.0,
                                 truncate=ELASTIC_TRUNCATE) * alpha
    dy = ndimage.gaussian_filter(rng.uniform_field(shape), sigma, mode="constant", cval=0.0,
                                 truncate=ELASTIC_TRUNCATE) * alpha
    return dx, dy


def elastic(img: GrayImage, alpha: float, sigma: float, rng: RngStream) -> GrayImage:
    """Random elastic deformation with Gaussian-smoothed uniform displacement fields"""
    if sigma <= 0:
        raise InvalidParameterError(f"Elastic sigma must be positive, got {sigma}")
    if alpha < 0:
        raise InvalidParameterError(f"Elastic alpha must be non-negative, got {alpha}")
    shape = (img.height, img.width)
    dx, dy = displacement_fields(shape, alpha, sigma, rng)
    if alpha == 0:
        return img
    grid_y, grid_x = np.mgrid[0:img.height, 0:img.width].astype(np.float64)
    return GrayImage(to_uint8(sample_grid(img, grid_x + dx, grid_y + dy)))
