from collections import Counter

import numpy as np
import pytest
from scipy import stats

from app.core.augment import (
    SampledParams,
    apply_params,
    compose,
    extreme_params,
    sample_and_apply,
    sample_params,
)
from app.core.errors import InvalidParameterError, UnknownPresetError
from app.core.presets import (
    BASELINE,
    COMBINED_TOP3,
    PRESET_ORDER,
    PRESETS,
    AugmentKind,
    get_preset,
    known_names,
    load_custom_config,
    order_key,
    resolve,
)
from app.core.raster import GrayImage
from utils.rng import RngStream

# (parameter, low, high) per preset
EXPECTED_RANGES = {
    "rot1.5": [("angle", -1.5, 1.5)],
    "rot5": [("angle", -5, 5)],
    "rot10": [("angle", -10, 10)],
    "positive": [("angle", 0, 1.5)],
    "negative": [("angle", -1.5, 0)],
    "rot+2": [("angle", 2, 2)],
    "rot-2": [("angle", -2, -2)],
    "square-dilation": [("se_size", 1, 4)],
    "disk-dilation": [("se_size", 1, 4)],
    "square-erosion": [("se_size", 1, 3)],
    "disk-erosion": [("se_size", 1, 3)],
    "shift": [("dx", 0, 15), ("dy", -3.5, 3.5)],
    "elastic": [("alpha", 16, 20), ("sigma", 5, 7)],
    "shear": [("angle", -5, 30)],
    "shear30": [("angle", -30, 30)],
    "scale75": [("factor", 0.75, 1)],
    "scale95": [("factor", 0.95, 1)],
    "mask10": [("rate", 0.10, 0.10)],
    "mask40": [("rate", 0.40, 0.40)],
    "noise": [("sigma", 0.08, 0.18)],
    "dropout": [("rate", 0, 0.2)],
    "blur": [("sigma", 0.1, 2.0)],
}


def test_preset_table():
    assert PRESET_ORDER[0] == BASELINE
    assert len(PRESET_ORDER) == 23
    assert set(PRESET_ORDER) == set(PRESETS)
    assert set(EXPECTED_RANGES) == set(PRESET_ORDER) - {BASELINE}
    assert COMBINED_TOP3 in known_names()


def test_aliases_and_unknown_names():
    assert get_preset("none").name == BASELINE
    with pytest.raises(UnknownPresetError):
        get_preset("rot15")


def test_combined_top3_members():
    assert [c.name for c in resolve(COMBINED_TOP3)] == ["rot1.5", "shift", "scale75"]


def test_order_key_puts_unknown_configs_last():
    names = ["custom-b", "blur", "rot5", BASELINE, "custom-a"]
    assert sorted(names, key=order_key) == [BASELINE, "rot5", "blur", "custom-a", "custom-b"]


@pytest.mark.slow
@pytest.mark.parametrize("preset", sorted(EXPECTED_RANGES))
def test_sampled_parameters_stay_in_range(preset):
    rng = RngStream(99).child("ranges", preset)
    for _ in range(10_000):
        values = sample_params(preset, rng).values
        for name, low, high in EXPECTED_RANGES[preset]:
            assert low <= values[name] <= high, (preset, name, values[name])


@pytest.mark.slow
@pytest.mark.parametrize("preset,key,support", [
    ("square-dilation", "se_size", [1, 2, 3, 4]),
    ("disk-erosion", "se_size", [1, 2, 3]),
    ("noise", "sigma", [0.08, 0.12, 0.18]),
])
def test_discrete_parameters_are_uniform(preset, key, support):
    rng = RngStream(7).child("uniform", preset)
    counts = Counter(sample_params(preset, rng).values[key] for _ in range(10_000))
    assert set(counts) == set(support)
    assert stats.chisquare([counts[v] for v in support]).pvalue > 0.001


def test_baseline_leaves_image_untouched(line_image, rng):
    out, params = sample_and_apply(BASELINE, line_image, rng)
    assert out is line_image
    assert params.values == {}


@pytest.mark.parametrize("preset", [p for p in PRESET_ORDER if p != BASELINE])
def test_every_preset_is_deterministic(preset, line_image):
    a, pa = sample_and_apply(preset, line_image, RngStream(3).child(preset))
    b, pb = sample_and_apply(preset, line_image, RngStream(3).child(preset))
    assert a == b
    assert pa.to_json() == pb.to_json()
    if PRESETS[preset].kind not in (AugmentKind.ROTATION_RANDOM, AugmentKind.ROTATION_FIXED, AugmentKind.SHEAR):
        assert a.height == line_image.height


def test_column_mask_trace_replays(line_image, rng):
    out, params = sample_and_apply("mask40", line_image, rng)
    assert len(params.values["columns"]) == 48
    replayed, _ = apply_params("mask40", line_image, params, RngStream(0))
    assert replayed == out


def test_params_json_is_sorted(rng):
    params = sample_params("shift", rng)
    assert params.to_json().index('"config"') < params.to_json().index('"dx"')
    assert params.to_dict()["config"] == "shift"


def test_shift_fits_small_images():
    narrow = GrayImage(np.full((3, 8), 200, dtype=np.uint8))
    clamped = 0
    for seed in range(50):
        out, params = sample_and_apply("shift", narrow, RngStream(seed))
        assert (out.width, out.height) == (8, 3)
        assert abs(params.values["dx"]) <= 7
        assert abs(params.values["dy"]) <= 2
        clamped += params.values["dx"] == 7.0
    assert clamped > 0


def test_compose_uses_independent_coins(line_image):
    configs = resolve(COMBINED_TOP3)
    seen = Counter()
    for seed in range(200):
        _, trace = compose(configs, 0.5, line_image, RngStream(seed))
        names = [p.config for p in trace]
        assert names == [c for c in ["rot1.5", "shift", "scale75"] if c in names]
        seen[len(trace)] += 1
    assert set(seen) == {0, 1, 2, 3}


def test_compose_probability_bounds(line_image, rng):
    assert compose(resolve(COMBINED_TOP3), 0.0, line_image, rng) == (line_image, [])
    with pytest.raises(InvalidParameterError):
        compose(resolve(COMBINED_TOP3), 1.5, line_image, rng)


@pytest.mark.parametrize("preset,key,values", [
    ("rot1.5", "angle", [-1.5, 1.5]),
    ("rot+2", "angle", [2.0]),
    ("square-dilation", "se_size", [1, 4]),
    ("scale75", "factor", [0.75, 1.0]),
    ("noise", "sigma", [0.08, 0.18]),
])
def test_extreme_params(preset, key, values):
    assert [p.values[key] for p in extreme_params(preset)] == values


def test_extreme_params_apply(line_image, rng):
    for preset in PRESET_ORDER:
        for params in extreme_params(preset):
            assert isinstance(params, SampledParams)
            apply_params(preset, line_image, params, rng)


def test_load_custom_config(tmp_path):
    path = tmp_path / "rot3.env"
    path.write_text("NAME=rot3\nKIND=rotation_random\nANGLE=-3,3\n", encoding="utf-8")
    config = load_custom_config(path)
    assert config.name == "rot3"
    assert config.kind is AugmentKind.ROTATION_RANDOM
    assert config.params["angle"] == (-3.0, 3.0)
    assert -3 <= sample_params(config, RngStream(0)).values["angle"] <= 3


def test_load_custom_morphology_config(tmp_path):
    path = tmp_path / "dil.env"
    path.write_text("NAME=big-dilation\nKIND=dilation\nSE_SHAPE=disk\nSE_SIZE=2,5\n", encoding="utf-8")
    config = load_custom_config(path)
    assert config.params["se_size"] == (2, 5)


@pytest.mark.parametrize("content", [
    "NAME=x\nANGLE=-3,3\n",
    "NAME=x\nKIND=twirl\n",
    "NAME=x\nKIND=rotation_random\nANGLE=3,-3\n",
    "NAME=x\nKIND=scale\nFACTOR=0.5,1.5\n",
    "NAME=x\nKIND=gaussian_blur\nSIGMA=0.5,1\nKERNEL=7\n",
])
def test_invalid_custom_configs(tmp_path, content):
    path = tmp_path / "bad.env"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(InvalidParameterError):
        load_custom_config(path)


def test_sampled_rate_coin_fraction():
    applied = np.array([RngStream(2024).child("augment", f"r{i}", 0).random() < 0.5 for i in range(10_000)])
    assert abs(applied.mean() - 0.5) < 0.02
