"""
Grayscale raster type, sampling, padding, resizing and PNG I/O.

Images are foreground-bright on a black background: 0 is background and every
read outside the image returns 0.
"""
import io
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
from PIL import Image, PngImagePlugin, UnidentifiedImageError
from scipy import ndimage

from app.core.errors import (
    DataError,
    DimensionTooSmallError,
    ImageNotFoundError,
    InvalidParameterError,
    UnsupportedFormatError,
)

logger = logging.getLogger(__name__)

BACKGROUND = 0

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class Interpolation(Enum):
    NEAREST = "nearest"
    BILINEAR = "bilinear"

    @property
    def order(self) -> int:
        return 0 if self is Interpolation.NEAREST else 1


class Anchor(Enum):
    TOP_LEFT = "top_left"
    CENTER_VERTICAL = "center_vertical"


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def to_uint8(values: np.ndarray) -> np.ndarray:
    """Round half up and clamp a float array into [0, 255]"""
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable 8-bit grayscale raster stored row-major as (height, width)"""
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 2 or pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise InvalidParameterError(f"Expected a non-empty 2-D raster, got shape {pixels.shape}")
        if pixels.dtype != np.uint8:
            if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
                raise InvalidParameterError("Intensities must lie in [0, 255]")
            pixels = pixels.astype(np.uint8)
        pixels = np.ascontiguousarray(pixels).copy()
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def from_rows(cls, rows) -> "GrayImage":
        return cls(np.array(rows, dtype=np.int64))

    @classmethod
    def blank(cls, width: int, height: int, value: int = BACKGROUND) -> "GrayImage":
        return cls(np.full((height, width), value, dtype=np.uint8))

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def data(self) -> bytes:
        return self.pixels.tobytes()

    def pixel(self, x: int, y: int) -> int:
        return int(self.pixels[y, x])

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))

    def __repr__(self) -> str:
        return f"GrayImage({self.width}x{self.height})"


def sample_grid(img: GrayImage, xs: np.ndarray, ys: np.ndarray,
                interpolation: Interpolation = Interpolation.BILINEAR) -> np.ndarray:
    """Sample at arrays of (x, y) coordinates; returns float intensities"""
    coords = np.stack([np.asarray(ys, dtype=np.float64), np.asarray(xs, dtype=np.float64)])
    return ndimage.map_coordinates(
        img.pixels.astype(np.float64), coords, order=interpolation.order,
        mode="grid-constant", cval=float(BACKGROUND), prefilter=False,
    )


def sample_bilinear(img: GrayImage, x: float, y: float) -> float:
    return float(sample_grid(img, np.array([x]), np.array([y]))[0])


def pad_to(img: GrayImage, target_w: int, target_h: int, anchor: Anchor = Anchor.TOP_LEFT) -> GrayImage:
    if target_w < img.width or target_h < img.height:
        raise DimensionTooSmallError(
            f"Cannot pad {img.width}x{img.height} to smaller target {target_w}x{target_h}"
        )
    top = (target_h - img.height) // 2 if Anchor(anchor) is Anchor.CENTER_VERTICAL else 0
    canvas = np.full((target_h, target_w), BACKGROUND, dtype=np.uint8)
    canvas[top:top + img.height, :img.width] = img.pixels
    return GrayImage(canvas)


def resize(img: GrayImage, target_w: int, target_h: int,
           interpolation: Interpolation = Interpolation.BILINEAR) -> GrayImage:
    """Pixel-centre aligned resize; source coordinates are clamped to the image"""
    if target_w < 1 or target_h < 1:
        raise InvalidParameterError(f"Target size must be positive, got {target_w}x{target_h}")
    if (target_w, target_h) == (img.width, img.height):
        return img
    sx = img.width / target_w
    sy = img.height / target_h
    xs = np.clip((np.arange(target_w) + 0.5) * sx - 0.5, 0, img.width - 1)
    ys = np.clip((np.arange(target_h) + 0.5) * sy - 0.5, 0, img.height - 1)
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    return GrayImage(to_uint8(sample_grid(img, grid_x, grid_y, interpolation)))


def resize_height(img: GrayImage, target_h: int) -> GrayImage:
    if target_h < 1:
        raise InvalidParameterError(f"Target height must be >= 1, got {target_h}")
    target_w = max(1, round_half_up(img.width * target_h / img.height))
    return resize(img, target_w, target_h)


def invert(img: GrayImage) -> GrayImage:
    return GrayImage(255 - img.pixels)


def _pixels_from(im: Image.Image, source, luma: bool) -> np.ndarray:
    mode = im.mode
    if mode == "L":
        return np.array(im, dtype=np.uint8)
    if mode == "1":
        return np.array(im.convert("L"), dtype=np.uint8)
    if mode in ("I", "I;16", "I;16B", "I;16L", "I;16N", "F"):
        raise UnsupportedFormatError(f"Unsupported bit depth ({mode}) in {source}; expected 8-bit grayscale")
    if mode in ("RGB", "RGBA", "P", "LA", "CMYK"):
        if not luma:
            raise UnsupportedFormatError(f"Colour image ({mode}) in {source}; pass luma conversion to accept it")
        rgb = np.array(im.convert("RGB"), dtype=np.float64)
        return to_uint8(rgb @ np.array(LUMA_WEIGHTS))
    raise UnsupportedFormatError(f"Unsupported image mode {mode} in {source}")


def _open(stream, source, luma: bool, invert_intensity: bool) -> GrayImage:
    try:
        with Image.open(stream) as im:
            im.load()
            pixels = _pixels_from(im, source, luma)
    except DataError:
        raise
    except UnidentifiedImageError as e:
        raise UnsupportedFormatError(f"Not a readable image: {source}") from e
    except (OSError, SyntaxError, ValueError) as e:
        # truncated or corrupt image data
        raise UnsupportedFormatError(f"Corrupt image {source}: {e}") from e
    img = GrayImage(pixels)
    return invert(img) if invert_intensity else img


def read_png(path: Union[str, Path], luma: bool = False, invert_intensity: bool = False) -> GrayImage:
    """
    Read an 8-bit grayscale PNG
    Args:
        path: image file
        luma: convert colour images with BT.601 weights instead of rejecting them
        invert_intensity: flip light-background scans to the black-background convention
    Returns:
        GrayImage
    """
    path = Path(path)
    if not path.is_file():
        raise ImageNotFoundError(f"Image not found: {path}")
    return _open(path, path, luma, invert_intensity)


def read_png_bytes(data: bytes, luma: bool = False, invert_intensity: bool = False,
                   source: str = "<bytes>") -> GrayImage:
    return _open(io.BytesIO(data), source, luma, invert_intensity)


def png_bytes(img: GrayImage, text: Optional[Dict[str, str]] = None) -> bytes:
    buffer = io.BytesIO()
    _save(img, buffer, text)
    return buffer.getvalue()


def _save(img: GrayImage, target, text: Optional[Dict[str, str]]):
    info = None
    if text:
        info = PngImagePlugin.PngInfo()
        for key in sorted(text):
            info.add_text(key, str(text[key]))
    Image.fromarray(np.asarray(img.pixels, dtype=np.uint8)).save(target, format="PNG", pnginfo=info)


def write_png(img: GrayImage, path: Union[str, Path], text: Optional[Dict[str, str]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _save(img, path, text)
    return path
