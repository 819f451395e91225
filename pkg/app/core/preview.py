"""
Preview contact sheets: a preset applied at the ends of its parameter ranges
and then at random draws, each tile preprocessed to the 1362x64 line format.

Pixels that a geometric augmentation introduced from outside the source image,
masked columns and dropped pixels are shown grey; content pixels and the
preprocessing pad stay as they are.
"""
import logging
from typing import List, Sequence, Union

import numpy as np

from app.core.augment import apply_params, compose, extreme_params, sample_params
from app.core.errors import InvalidParameterError
from app.core.presets import COMPOSITE_PROBABILITY, AugmentConfig, AugmentKind, resolve
from app.core.raster import GrayImage
from app.core.textdata import FitMode, preprocess_line
from utils.rng import RngStream

logger = logging.getLogger(__name__)

PREVIEW_GREY = 128
TILE_GAP = 4
GREYED_KINDS = {
    AugmentKind.ROTATION_RANDOM,
    AugmentKind.ROTATION_FIXED,
    AugmentKind.SHIFT,
    AugmentKind.SHEAR,
    AugmentKind.SCALE,
    AugmentKind.ELASTIC,
    AugmentKind.COLUMN_MASK,
    AugmentKind.PIXEL_DROPOUT,
}


def _grey_padding(augmented: GrayImage, coverage: GrayImage) -> GrayImage:
    # coverage is the same transform, with the same draws, applied to an all-white source
    pixels = augmented.pixels.copy()
    pixels[coverage.pixels < 128] = PREVIEW_GREY
    return GrayImage(pixels)


def _tracks_coverage(configs: Sequence[AugmentConfig]) -> bool:
    return all(c.kind in GREYED_KINDS for c in configs)


def preview_tiles(preset: Union[str, AugmentConfig], img: GrayImage, seed: int, count: int,
                  fit: FitMode = FitMode.SHRINK) -> List[GrayImage]:
    """
    Augmented variants of one image for visual inspection
    Args:
        preset: preset name or config
        img: source line image
        seed: master seed; tile i uses the child stream ("preview", i)
        count: number of tiles; range extremes come first, random draws fill the rest
        fit: preprocessing fit mode
    Returns:
        list of count preprocessed tiles
    """
    if count < 1:
        raise InvalidParameterError(f"Preview count must be >= 1, got {count}")
    resolved = resolve(preset) if isinstance(preset, str) else preset
    configs = resolved if isinstance(resolved, list) else [resolved]
    white = GrayImage(np.full(img.pixels.shape, 255, dtype=np.uint8))
    master = RngStream(seed)
    track = _tracks_coverage(configs)

    tiles: List[GrayImage] = []
    extremes = extreme_params(configs[0]) if len(configs) == 1 else []
    for index in range(count):
        rng = master.child("preview", index)
        if len(configs) > 1:
            twin = rng.clone()
            out, _ = compose(configs, COMPOSITE_PROBABILITY, img, rng)
            cover, _ = compose(configs, COMPOSITE_PROBABILITY, white, twin)
        else:
            config = configs[0]
            params = extremes[index] if index < len(extremes) else sample_params(config, rng)
            twin = rng.clone()
            out, _ = apply_params(config, img, params, rng)
            cover, _ = apply_params(config, white, params, twin)
        if track:
            out = _grey_padding(out, cover)
        tiles.append(preprocess_line(out, fit))
    logger.info(f"Rendered {len(tiles)} preview tiles ({len(extremes)} range extremes)")
    return tiles


def contact_sheet(tiles: Sequence[GrayImage], gap: int = TILE_GAP) -> GrayImage:
    """Stack tiles vertically with grey separator rows"""
    if not tiles:
        raise InvalidParameterError("Contact sheet needs at least one tile")
    width = max(t.width for t in tiles)
    rows = []
    for i, tile in enumerate(tiles):
        if i:
            rows.append(np.full((gap, width), PREVIEW_GREY, dtype=np.uint8))
        block = np.zeros((tile.height, width), dtype=np.uint8)
        block[:, :tile.width] = tile.pixels
        rows.append(block)
    return GrayImage(np.vstack(rows))
