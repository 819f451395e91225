from pathlib import Path

import numpy as np
import pytest

from app.core.metrics import RunResult, write_results
from app.core.raster import GrayImage, write_png
from app.core.textdata import load_alphabet
from utils.rng import RngStream


@pytest.fixture
def rng():
    return RngStream(1234)


@pytest.fixture(scope="session")
def alphabet():
    return load_alphabet()


def stroke_image(width: int = 120, height: int = 20, seed: int = 0) -> GrayImage:
    """Bright pseudo-handwriting strokes on black"""
    gen = np.random.default_rng(seed)
    pixels = np.zeros((height, width), dtype=np.uint8)
    for x in range(2, width - 2, 7):
        top = int(gen.integers(2, height // 2))
        bottom = int(gen.integers(height // 2, height - 2))
        pixels[top:bottom, x:x + 2] = 230
        pixels[bottom - 1, x:x + 6] = 200
    return GrayImage(pixels)


@pytest.fixture
def line_image():
    return stroke_image()


MANIFEST_ROWS = [
    ("l001", "0", "cv", "abc de"),
    ("l002", "1", "cv", "hej då"),
    ("l003", "2", "cv", "12 apor"),
    ("l004", "-", "test_in_domain", "xyz"),
    ("l005", "-", "test_out_of_domain", "ö, å!"),
    ("l006", "-", "test_out_of_domain", "sista raden"),
]


@pytest.fixture
def manifest_file(tmp_path) -> Path:
    """Small manifest with one 80x16 PNG per record"""
    root = tmp_path / "dataset"
    lines = []
    for i, (record_id, fold, split, text) in enumerate(MANIFEST_ROWS):
        write_png(stroke_image(80 + 4 * i, 16, seed=i), root / "lines" / f"{record_id}.png")
        lines.append(f"lines/{record_id}.png\t{fold}\t{split}\t{text}")
    path = root / "manifest.tsv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def runs_with(config: str, mean: float, std: float, folds: int = 5, runs: int = 2,
              split: str = "pooled", wer_offset: float = 0.2):
    """Run results alternating mean -/+ e so the sample mean and std equal the given values"""
    n = folds * runs
    e = std * np.sqrt((n - 1) / n)
    results = []
    for fold in range(folds):
        for run in range(runs):
            sign = -1 if (fold * runs + run) % 2 == 0 else 1
            cer = round(mean + sign * e, 6)
            results.append(RunResult(config, fold, run, split, cer, round(cer + wer_offset, 6)))
    return results


@pytest.fixture
def results_csv(tmp_path):
    def _write(name: str, results) -> Path:
        return write_results(results, tmp_path / "results" / f"{name}.csv")
    return _write
