"""
Augmentation presets: the 22 evaluated configurations, the augmentation-free
baseline and the combined top-3 composition, plus loading of custom presets
from KEY=value files.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple, Union

from dotenv import dotenv_values

from app.core.errors import InvalidParameterError, UnknownPresetError
from app.core.morphology import SEShape

logger = logging.getLogger(__name__)

BASELINE = "baseline"
CUSTOM = "custom"
COMBINED_TOP3 = "combined-top3"
COMPOSITE_PROBABILITY = 0.5


class AugmentKind(Enum):
    ROTATION_RANDOM = "rotation_random"
    ROTATION_FIXED = "rotation_fixed"
    DILATION = "dilation"
    EROSION = "erosion"
    SHIFT = "shift"
    ELASTIC = "elastic"
    SHEAR = "shear"
    SCALE = "scale"
    COLUMN_MASK = "column_mask"
    PIXEL_DROPOUT = "pixel_dropout"
    GAUSSIAN_NOISE = "gaussian_noise"
    GAUSSIAN_BLUR = "gaussian_blur"
    NONE = "none"


# parameter names each kind requires; ranges are (low, high) tuples
REQUIRED_PARAMS: Dict[AugmentKind, Tuple[str, ...]] = {
    AugmentKind.ROTATION_RANDOM: ("angle",),
    AugmentKind.ROTATION_FIXED: ("angle",),
    AugmentKind.DILATION: ("se_shape", "se_size"),
    AugmentKind.EROSION: ("se_shape", "se_size"),
    AugmentKind.SHIFT: ("shift_x", "shift_y"),
    AugmentKind.ELASTIC: ("alpha", "sigma"),
    AugmentKind.SHEAR: ("angle",),
    AugmentKind.SCALE: ("factor",),
    AugmentKind.COLUMN_MASK: ("rate",),
    AugmentKind.PIXEL_DROPOUT: ("rate",),
    AugmentKind.GAUSSIAN_NOISE: ("sigma_choices",),
    AugmentKind.GAUSSIAN_BLUR: ("sigma", "kernel"),
    AugmentKind.NONE: (),
}

RANGE_PARAMS = {"se_size", "shift_x", "shift_y", "alpha", "sigma", "factor"}


@dataclass(frozen=True)
class AugmentConfig:
    name: str
    kind: AugmentKind
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", AugmentKind(self.kind))
        missing = [p for p in REQUIRED_PARAMS[self.kind] if p not in self.params]
        if missing:
            raise InvalidParameterError(f"Preset {self.name}: missing parameter(s) {', '.join(missing)}")
        self._validate()

    def _validate(self):
        kind, p = self.kind, self.params
        for key, value in p.items():
            if isinstance(value, tuple) and key != "sigma_choices":
                if len(value) != 2 or value[0] > value[1]:
                    raise InvalidParameterError(f"Preset {self.name}: range {key}={value} is not ordered")
        if kind in (AugmentKind.ROTATION_RANDOM, AugmentKind.SHEAR) and not isinstance(p["angle"], tuple):
            raise InvalidParameterError(f"Preset {self.name}: angle must be a range")
        if kind in (AugmentKind.DILATION, AugmentKind.EROSION):
            low, high = p["se_size"]
            if not (isinstance(low, int) and isinstance(high, int)) or low < 1:
                raise InvalidParameterError(f"Preset {self.name}: SE sizes must be positive integers")
            SEShape(p["se_shape"])
        if kind is AugmentKind.SCALE:
            low, high = p["factor"]
            if not 0 < low <= high <= 1:
                raise InvalidParameterError(f"Preset {self.name}: scale factors must lie in (0, 1]")
        if kind in (AugmentKind.COLUMN_MASK, AugmentKind.PIXEL_DROPOUT):
            rate = p["rate"]
            bounds = rate if isinstance(rate, tuple) else (rate, rate)
            if not 0 <= bounds[0] <= bounds[1] <= 1:
                raise InvalidParameterError(f"Preset {self.name}: rates must lie in [0, 1]")
        if kind is AugmentKind.GAUSSIAN_NOISE:
            if not p["sigma_choices"] or any(s < 0 for s in p["sigma_choices"]):
                raise InvalidParameterError(f"Preset {self.name}: noise sigmas must be non-negative")
        if kind is AugmentKind.GAUSSIAN_BLUR and p["sigma"][0] <= 0:
            raise InvalidParameterError(f"Preset {self.name}: blur sigma must be positive")
        if kind is AugmentKind.GAUSSIAN_BLUR and p["kernel"] != 5:
            raise InvalidParameterError(f"Preset {self.name}: only a 5-tap blur kernel is supported")
        if kind is AugmentKind.ELASTIC and (p["sigma"][0] <= 0 or p["alpha"][0] < 0):
            raise InvalidParameterError(f"Preset {self.name}: elastic needs alpha >= 0 and sigma > 0")


def _preset(name: str, kind: AugmentKind, **params) -> AugmentConfig:
    return AugmentConfig(name=name, kind=kind, params=params)


PRESET_ORDER: List[str] = [
    BASELINE,
    "rot1.5", "rot5", "rot10", "positive", "negative", "rot+2", "rot-2",
    "square-dilation", "disk-dilation", "square-erosion", "disk-erosion",
    "shift", "elastic", "shear", "shear30", "scale75", "scale95",
    "mask10", "mask40", "noise", "dropout", "blur",
]

PRESETS: Dict[str, AugmentConfig] = {
    BASELINE: _preset(BASELINE, AugmentKind.NONE),
    "rot1.5": _preset("rot1.5", AugmentKind.ROTATION_RANDOM, angle=(-1.5, 1.5)),
    "rot5": _preset("rot5", AugmentKind.ROTATION_RANDOM, angle=(-5.0, 5.0)),
    "rot10": _preset("rot10", AugmentKind.ROTATION_RANDOM, angle=(-10.0, 10.0)),
    "positive": _preset("positive", AugmentKind.ROTATION_RANDOM, angle=(0.0, 1.5)),
    "negative": _preset("negative", AugmentKind.ROTATION_RANDOM, angle=(-1.5, 0.0)),
    "rot+2": _preset("rot+2", AugmentKind.ROTATION_FIXED, angle=2.0),
    "rot-2": _preset("rot-2", AugmentKind.ROTATION_FIXED, angle=-2.0),
    "square-dilation": _preset("square-dilation", AugmentKind.DILATION, se_shape=SEShape.SQUARE, se_size=(1, 4)),
    "disk-dilation": _preset("disk-dilation", AugmentKind.DILATION, se_shape=SEShape.DISK, se_size=(1, 4)),
    "square-erosion": _preset("square-erosion", AugmentKind.EROSION, se_shape=SEShape.SQUARE, se_size=(1, 3)),
    "disk-erosion": _preset("disk-erosion", AugmentKind.EROSION, se_shape=SEShape.DISK, se_size=(1, 3)),
    "shift": _preset("shift", AugmentKind.SHIFT, shift_x=(0.0, 15.0), shift_y=(-3.5, 3.5)),
    "elastic": _preset("elastic", AugmentKind.ELASTIC, alpha=(16.0, 20.0), sigma=(5.0, 7.0)),
    "shear": _preset("shear", AugmentKind.SHEAR, angle=(-5.0, 30.0)),
    "shear30": _preset("shear30", AugmentKind.SHEAR, angle=(-30.0, 30.0)),
    "scale75": _preset("scale75", AugmentKind.SCALE, factor=(0.75, 1.0)),
    "scale95": _preset("scale95", AugmentKind.SCALE, factor=(0.95, 1.0)),
    "mask10": _preset("mask10", AugmentKind.COLUMN_MASK, rate=0.10),
    "mask40": _preset("mask40", AugmentKind.COLUMN_MASK, rate=0.40),
    "noise": _preset("noise", AugmentKind.GAUSSIAN_NOISE, sigma_choices=(0.08, 0.12, 0.18)),
    "dropout": _preset("dropout", AugmentKind.PIXEL_DROPOUT, rate=(0.0, 0.20)),
    "blur": _preset("blur", AugmentKind.GAUSSIAN_BLUR, sigma=(0.1, 2.0), kernel=5),
}

ALIASES = {"none": BASELINE}

COMPOSITES: Dict[str, List[str]] = {
    COMBINED_TOP3: ["rot1.5", "shift", "scale75"],
}


def get_preset(name: str) -> AugmentConfig:
    key = ALIASES.get(name, name)
    if key not in PRESETS:
        raise UnknownPresetError(f"Unknown augmentation preset: {name}")
    return PRESETS[key]


def resolve(name: str) -> Union[AugmentConfig, List[AugmentConfig]]:
    """A single preset, or the member list of a composite preset"""
    if name in COMPOSITES:
        return [get_preset(member) for member in COMPOSITES[name]]
    return get_preset(name)


def known_names() -> List[str]:
    return PRESET_ORDER + list(COMPOSITES)


def order_key(name: str) -> Tuple[int, str]:
    """Sort key placing the evaluated presets first in their canonical order"""
    if name in PRESET_ORDER:
        return PRESET_ORDER.index(name), ""
    return len(PRESET_ORDER), name


def _parse_range(raw: str, cast=float) -> Tuple:
    parts = [cast(x.strip()) for x in raw.split(",") if x.strip()]
    if len(parts) == 1:
        return parts[0], parts[0]
    if len(parts) != 2:
        raise InvalidParameterError(f"Expected 'low,high', got {raw!r}")
    return parts[0], parts[1]


def load_custom_config(path: Union[str, Path]) -> AugmentConfig:
    """
    Load a custom preset from a KEY=value file, e.g.

        NAME=rot3
        KIND=rotation_random
        ANGLE=-3,3
    """
    values = {k.upper(): v for k, v in dotenv_values(path).items() if v is not None}
    if "KIND" not in values:
        raise InvalidParameterError(f"Custom preset {path} does not declare KIND")
    try:
        kind = AugmentKind(values["KIND"].strip().lower())
    except ValueError as e:
        raise InvalidParameterError(f"Unknown augmentation kind {values['KIND']!r} in {path}") from e

    params: Dict[str, Any] = {}
    try:
        for key, raw in values.items():
            name = key.lower()
            if name in ("name", "kind"):
                continue
            if name == "angle":
                low, high = _parse_range(raw)
                params[name] = low if kind is AugmentKind.ROTATION_FIXED else (low, high)
            elif name == "se_shape":
                params[name] = SEShape(raw.strip().lower())
            elif name == "se_size":
                params[name] = _parse_range(raw, int)
            elif name == "sigma_choices":
                params[name] = tuple(float(x) for x in raw.split(",") if x.strip())
            elif name == "kernel":
                params[name] = int(raw)
            elif name == "rate":
                low, high = _parse_range(raw)
                params[name] = low if low == high and kind is AugmentKind.COLUMN_MASK else (low, high)
            elif name in RANGE_PARAMS:
                params[name] = _parse_range(raw)
            else:
                logger.warning(f"Ignoring unknown key {key} in custom preset {path}")
    except ValueError as e:
        raise InvalidParameterError(f"Malformed value in custom preset {path}: {e}") from e

    if kind is AugmentKind.GAUSSIAN_BLUR:
        params.setdefault("kernel", 5)
    config = AugmentConfig(name=values.get("NAME", CUSTOM).strip() or CUSTOM, kind=kind, params=params)
    logger.info(f"Loaded custom preset {config.name} ({kind.value}) from {path}")
    return config
