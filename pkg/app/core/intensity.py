"""
Intensity augmentations: column masking, pixel dropout, Gaussian noise and
Gaussian blur. All of them preserve image dimensions.
"""
import logging
from typing import Tuple

import numpy as np
from scipy import ndimage

from app.core.errors import InvalidParameterError
from app.core.raster import BACKGROUND, GrayImage, round_half_up, to_uint8
from utils.rng import RngStream

logger = logging.getLogger(__name__)

BLUR_KERNEL_SIZE = 5


def _check_rate(rate: float, name: str = "rate"):
    if not 0 <= rate <= 1:
        raise InvalidParameterError(f"{name} must lie in [0, 1], got {rate}")


def mask_columns(img: GrayImage, rate: float, rng: RngStream) -> Tuple[GrayImage, np.ndarray]:
    """Zero exactly round(rate * width) distinct columns; returns the image and the masked indices"""
    _check_rate(rate)
    count = round_half_up(rate * img.width)
    columns = rng.sample_without_replacement(img.width, count)
    if count == 0:
        return img, columns
    pixels = img.pixels.copy()
    pixels[:, columns] = BACKGROUND
    return GrayImage(pixels), columns


def pixel_dropout(img: GrayImage, rate: float, rng: RngStream) -> GrayImage:
    _check_rate(rate)
    dropped = rng.random((img.height, img.width)) < rate
    if not dropped.any():
        return img
    pixels = img.pixels.copy()
    pixels[dropped] = BACKGROUND
    return GrayImage(pixels)


def gaussian_noise(img: GrayImage, sigma: float, rng: RngStream) -> GrayImage:
    """Additive noise with std sigma on the [0, 1] intensity scale, clamped"""
    if sigma < 0:
        raise InvalidParameterError(f"Noise sigma must be non-negative, got {sigma}")
    noise = rng.normal(sigma, (img.height, img.width))
    if sigma == 0:
        return img
    noisy = np.clip(img.pixels / 255.0 + noise, 0.0, 1.0) * 255.0
    return GrayImage(to_uint8(noisy))


def gaussian_taps(sigma: float, size: int = BLUR_KERNEL_SIZE) -> np.ndarray:
    if sigma <= 0:
        raise InvalidParameterError(f"Blur sigma must be positive, got {sigma}")
    half = size // 2
    k = np.arange(-half, half + 1, dtype=np.float64)
    taps = np.exp(-(k ** 2) / (2.0 * sigma ** 2))
    return taps / taps.sum()


def gaussian_blur(img: GrayImage, sigma: float) -> GrayImage:
    """Separable 5x5 Gaussian blur with edge replication"""
    taps = gaussian_taps(sigma)
    rows = ndimage.correlate1d(img.pixels.astype(np.float64), taps, axis=1, mode="nearest")
    both = ndimage.correlate1d(rows, taps, axis=0, mode="nearest")
    return GrayImage(to_uint8(both))
