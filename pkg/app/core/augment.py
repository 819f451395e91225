"""
Parameter sampling and application for augmentation presets.

A preset's parameters are drawn per image (uniform over real ranges, uniform
over integer SE sizes, uniform choice over discrete sets), applied, and
returned alongside the result so every application can be traced.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple, Union

from app.core import geometry, intensity
from app.core.errors import InvalidParameterError
from app.core.morphology import MorphOp, SEShape, StructuringElement, morphology
from app.core.presets import AugmentConfig, AugmentKind, get_preset
from app.core.raster import GrayImage
from utils.rng import RngStream

logger = logging.getLogger(__name__)

ConfigLike = Union[str, AugmentConfig]


@dataclass
class SampledParams:
    config: str
    values: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"config": self.config, **self.values}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _config(config: ConfigLike) -> AugmentConfig:
    return get_preset(config) if isinstance(config, str) else config


def _range(value) -> Tuple[float, float]:
    return value if isinstance(value, tuple) else (value, value)


def _clamp_shift(value: float, size: int) -> float:
    limit = max(size - 1, 0)
    return float(min(max(value, -limit), limit))


def sample_params(config: ConfigLike, rng: RngStream) -> SampledParams:
    """Draw the per-image parameters of a preset without touching any pixels"""
    config = _config(config)
    kind, p = config.kind, config.params
    values: Dict[str, Any] = {}

    if kind is AugmentKind.ROTATION_RANDOM or kind is AugmentKind.SHEAR:
        values["angle"] = rng.uniform(*p["angle"])
    elif kind is AugmentKind.ROTATION_FIXED:
        values["angle"] = float(p["angle"])
    elif kind in (AugmentKind.DILATION, AugmentKind.EROSION):
        values["se_shape"] = SEShape(p["se_shape"]).value
        values["se_size"] = rng.integer(*p["se_size"])
    elif kind is AugmentKind.SHIFT:
        values["dx"] = rng.uniform(*p["shift_x"])
        values["dy"] = rng.uniform(*p["shift_y"])
    elif kind is AugmentKind.ELASTIC:
        values["alpha"] = rng.uniform(*p["alpha"])
        values["sigma"] = rng.uniform(*p["sigma"])
    elif kind is AugmentKind.SCALE:
        values["factor"] = rng.uniform(*p["factor"])
    elif kind is AugmentKind.COLUMN_MASK:
        values["rate"] = rng.uniform(*_range(p["rate"])) if isinstance(p["rate"], tuple) else float(p["rate"])
    elif kind is AugmentKind.PIXEL_DROPOUT:
        values["rate"] = rng.uniform(*_range(p["rate"]))
    elif kind is AugmentKind.GAUSSIAN_NOISE:
        values["sigma"] = float(rng.choice(list(p["sigma_choices"])))
    elif kind is AugmentKind.GAUSSIAN_BLUR:
        values["sigma"] = rng.uniform(*p["sigma"])
        values["kernel"] = int(p["kernel"])
    return SampledParams(config.name, values)


def apply_params(config: ConfigLike, img: GrayImage, params: SampledParams,
                 rng: RngStream) -> Tuple[GrayImage, SampledParams]:
    """Apply already drawn parameters; pixel-level randomness is taken from rng"""
    config = _config(config)
    kind, v = config.kind, params.values

    if kind is AugmentKind.NONE:
        return img, params
    if kind in (AugmentKind.ROTATION_RANDOM, AugmentKind.ROTATION_FIXED):
        return geometry.rotate_expand(img, v["angle"]), params
    if kind in (AugmentKind.DILATION, AugmentKind.EROSION):
        se = StructuringElement.build(SEShape(v["se_shape"]), v["se_size"])
        op = MorphOp.DILATE if kind is AugmentKind.DILATION else MorphOp.ERODE
        return morphology(img, op, se), params
    if kind is AugmentKind.SHIFT:
        # draws beyond the image collapse to the largest shift it allows
        dx, dy = _clamp_shift(v["dx"], img.width), _clamp_shift(v["dy"], img.height)
        if (dx, dy) != (v["dx"], v["dy"]):
            params = SampledParams(params.config, {**v, "dx": dx, "dy": dy})
        return geometry.shift(img, dx, dy), params
    if kind is AugmentKind.ELASTIC:
        return geometry.elastic(img, v["alpha"], v["sigma"], rng), params
    if kind is AugmentKind.SHEAR:
        return geometry.shear_horizontal(img, v["angle"]), params
    if kind is AugmentKind.SCALE:
        return geometry.scale_down(img, v["factor"]), params
    if kind is AugmentKind.COLUMN_MASK:
        if "columns" in v:
            masked = img.pixels.copy()
            masked[:, list(v["columns"])] = 0
            return GrayImage(masked), params
        out, columns = intensity.mask_columns(img, v["rate"], rng)
        return out, SampledParams(params.config, {**v, "columns": [int(c) for c in columns]})
    if kind is AugmentKind.PIXEL_DROPOUT:
        return intensity.pixel_dropout(img, v["rate"], rng), params
    if kind is AugmentKind.GAUSSIAN_NOISE:
        return intensity.gaussian_noise(img, v["sigma"], rng), params
    if kind is AugmentKind.GAUSSIAN_BLUR:
        return intensity.gaussian_blur(img, v["sigma"]), params
    raise InvalidParameterError(f"Unhandled augmentation kind {kind}")


def sample_and_apply(config: ConfigLike, img: GrayImage, rng: RngStream) -> Tuple[GrayImage, SampledParams]:
    config = _config(config)
    params = sample_params(config, rng)
    return apply_params(config, img, params, rng)


def compose(configs: Sequence[ConfigLike], per_config_prob: float, img: GrayImage,
            rng: RngStream) -> Tuple[GrayImage, List[SampledParams]]:
    """Apply each config in order with an independent coin flip; returns the applied trace"""
    if not 0 <= per_config_prob <= 1:
        raise InvalidParameterError(f"Probability must lie in [0, 1], got {per_config_prob}")
    trace: List[SampledParams] = []
    for config in configs:
        config = _config(config)
        if rng.random() < per_config_prob:
            img, params = sample_and_apply(config, img, rng)
            trace.append(params)
    return img, trace


def extreme_params(config: ConfigLike) -> List[SampledParams]:
    """Parameter sets at the ends of each sampling range, used for previews"""
    config = _config(config)
    kind, p = config.kind, config.params

    def pair(**ends):
        low = {k: r[0] for k, r in ends.items()}
        high = {k: r[1] for k, r in ends.items()}
        return [SampledParams(config.name, low), SampledParams(config.name, high)]

    if kind in (AugmentKind.ROTATION_RANDOM, AugmentKind.SHEAR):
        return pair(angle=p["angle"])
    if kind is AugmentKind.ROTATION_FIXED:
        return [SampledParams(config.name, {"angle": float(p["angle"])})]
    if kind in (AugmentKind.DILATION, AugmentKind.EROSION):
        shape = SEShape(p["se_shape"]).value
        return [SampledParams(config.name, {"se_shape": shape, "se_size": size}) for size in p["se_size"]]
    if kind is AugmentKind.SHIFT:
        return pair(dx=p["shift_x"], dy=p["shift_y"])
    if kind is AugmentKind.ELASTIC:
        # weakest (small alpha, wide smoothing) and strongest deformation
        return [
            SampledParams(config.name, {"alpha": p["alpha"][0], "sigma": p["sigma"][1]}),
            SampledParams(config.name, {"alpha": p["alpha"][1], "sigma": p["sigma"][0]}),
        ]
    if kind is AugmentKind.SCALE:
        return pair(factor=p["factor"])
    if kind is AugmentKind.PIXEL_DROPOUT:
        return pair(rate=_range(p["rate"]))
    if kind is AugmentKind.COLUMN_MASK:
        return [SampledParams(config.name, {"rate": r}) for r in sorted(set(_range(p["rate"])))]
    if kind is AugmentKind.GAUSSIAN_NOISE:
        choices = sorted(p["sigma_choices"])
        return [SampledParams(config.name, {"sigma": s}) for s in sorted({choices[0], choices[-1]})]
    if kind is AugmentKind.GAUSSIAN_BLUR:
        return [SampledParams(config.name, {"sigma": s, "kernel": int(p["kernel"])}) for s in p["sigma"]]
    return []
