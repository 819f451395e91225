"""
Grayscale erosion and dilation with square and disk structuring elements.

Square SEs are given by width, disk SEs by radius. Erosion reads 255 outside
the image and dilation reads 0, so neither border pulls strokes towards the
padding colour.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Tuple

import numpy as np
from scipy import ndimage

from app.core.errors import InvalidParameterError
from app.core.raster import GrayImage

logger = logging.getLogger(__name__)

Offset = Tuple[int, int]


class SEShape(Enum):
    SQUARE = "square"
    DISK = "disk"


class MorphOp(Enum):
    DILATE = "dilate"
    ERODE = "erode"


@dataclass(frozen=True)
class StructuringElement:
    shape: SEShape
    size: int
    offsets: FrozenSet[Offset] = field(default=frozenset())

    @classmethod
    def square(cls, width: int) -> "StructuringElement":
        if width < 1:
            raise InvalidParameterError(f"Square SE width must be >= 1, got {width}")
        anchor = (width - 1) // 2
        offsets = frozenset(
            (dx - anchor, dy - anchor) for dy in range(width) for dx in range(width)
        )
        return cls(SEShape.SQUARE, width, offsets)

    @classmethod
    def disk(cls, radius: int) -> "StructuringElement":
        if radius < 1:
            raise InvalidParameterError(f"Disk SE radius must be >= 1, got {radius}")
        offsets = frozenset(
            (dx, dy)
            for dy in range(-radius, radius + 1)
            for dx in range(-radius, radius + 1)
            if dx * dx + dy * dy <= radius * radius
        )
        return cls(SEShape.DISK, radius, offsets)

    @classmethod
    def from_offsets(cls, offsets) -> "StructuringElement":
        offsets = frozenset((int(dx), int(dy)) for dx, dy in offsets)
        if not offsets:
            raise InvalidParameterError("Structuring element must not be empty")
        return cls(SEShape.SQUARE, 0, offsets)

    @classmethod
    def build(cls, shape: SEShape, size: int) -> "StructuringElement":
        return cls.square(size) if SEShape(shape) is SEShape.SQUARE else cls.disk(size)

    def reflected(self) -> "StructuringElement":
        return StructuringElement(self.shape, self.size, frozenset((-dx, -dy) for dx, dy in self.offsets))

    def footprint(self) -> Tuple[np.ndarray, Tuple[int, int]]:
        """Boolean footprint plus the scipy origin that places offset (0, 0) on the output pixel"""
        # the box always contains (0, 0) so scipy accepts the origin
        xs = [0] + [dx for dx, _ in self.offsets]
        ys = [0] + [dy for _, dy in self.offsets]
        min_x, min_y = min(xs), min(ys)
        fp = np.zeros((max(ys) - min_y + 1, max(xs) - min_x + 1), dtype=bool)
        for dx, dy in self.offsets:
            fp[dy - min_y, dx - min_x] = True
        origin = (-(fp.shape[0] // 2) - min_y, -(fp.shape[1] // 2) - min_x)
        return fp, origin


def _erode(pixels: np.ndarray, se: StructuringElement) -> np.ndarray:
    # out(p) = min over o in SE of in(p + o)
    fp, origin = se.footprint()
    return ndimage.grey_erosion(pixels, footprint=fp, mode="constant", cval=255, origin=origin)


def morphology(img: GrayImage, op: MorphOp, se: StructuringElement) -> GrayImage:
    if not se.offsets:
        raise InvalidParameterError("Structuring element must not be empty")
    op = MorphOp(op)
    if op is MorphOp.ERODE:
        return GrayImage(_erode(img.pixels, se))
    # dilation is the dual of erosion with the reflected SE:
    # out(p) = max over o in SE of in(p - o), reading 0 outside the image
    return GrayImage(255 - _erode(255 - img.pixels, se.reflected()))


def dilate(img: GrayImage, se: StructuringElement) -> GrayImage:
    return morphology(img, MorphOp.DILATE, se)


def erode(img: GrayImage, se: StructuringElement) -> GrayImage:
    return morphology(img, MorphOp.ERODE, se)
