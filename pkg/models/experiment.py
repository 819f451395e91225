"""
Experiment runs: augmentation, preview, scoring, comparison and manifest
validation, shared by the command line and the web page.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from app.core.data_handler import ConfigSpec, DataHandler, augmented_manifest
from app.core.errors import DataError, MissingBaselineError, MissingPredictionError, UsageError
from app.core.metrics import (
    FLOAT_FORMAT,
    LineScore,
    RunResult,
    ScoreMode,
    aggregate,
    corpus_rates,
    read_results,
    score_line,
    write_results,
)
from app.core.parse_predictions import load_hypotheses
from app.core.presets import BASELINE, PRESET_ORDER, load_custom_config, order_key, resolve
from app.core.preview import contact_sheet, preview_tiles
from app.core.raster import read_png, write_png
from app.core.report import Report, describe_verdicts, render_report
from app.core.stats import Metric, PairOn, WilcoxonMode, compare_to_baseline
from app.core.textdata import (
    FitMode,
    Manifest,
    ValidationReport,
    load_alphabet,
    load_manifest,
    validate_lion_layout,
    write_manifest,
)

from .config import BenchConfig, SplitView

logger = logging.getLogger(__name__)

LINE_COLUMNS = ["record_id", "split", "cer", "wer", "char_s", "char_d", "char_i", "char_n",
                "word_s", "word_d", "word_i", "word_n"]


@dataclass
class ExperimentSpec:
    manifest: Optional[Path] = None
    presets: List[str] = field(default_factory=lambda: list(PRESET_ORDER))
    seed: int = BenchConfig.DEFAULT_SEED
    prob: float = BenchConfig.DEFAULT_PROB
    out_dir: Path = Path(BenchConfig.DEFAULT_OUT_DIR)
    alpha: float = BenchConfig.DEFAULT_ALPHA
    n_comparisons: int = BenchConfig.DEFAULT_N_COMPARISONS
    epoch: int = 0
    workers: int = BenchConfig.DEFAULT_WORKERS
    fit: FitMode = FitMode.ERROR
    pair_on: PairOn = PairOn.RUN
    split: SplitView = SplitView.POOLED
    wilcoxon_mode: WilcoxonMode = WilcoxonMode.AUTO
    score_mode: ScoreMode = ScoreMode.MICRO
    luma: bool = False
    invert: bool = False
    strict: bool = False
    alphabet: Optional[Path] = None
    custom_presets: List[Path] = field(default_factory=list)

    def __post_init__(self):
        if not 0 <= self.prob <= 1:
            raise UsageError(f"Probability must lie in [0, 1], got {self.prob}")
        if self.seed < 0:
            raise UsageError(f"Seed must be non-negative, got {self.seed}")
        if not 0 < self.alpha < 1:
            raise UsageError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.n_comparisons < 1:
            raise UsageError(f"Number of comparisons must be >= 1, got {self.n_comparisons}")
        if self.epoch < 0 or self.workers < 1:
            raise UsageError("epoch must be >= 0 and workers >= 1")
        self.out_dir = Path(self.out_dir)
        self._custom = {c.name: c for c in (load_custom_config(p) for p in self.custom_presets)}
        for name in self.presets:
            self.config_for(name)

    @classmethod
    def from_config(cls, **overrides) -> "ExperimentSpec":
        """Environment defaults (BenchConfig) overridden by explicit, non-None values"""
        config = BenchConfig.load_config()
        values = {
            "seed": config["seed"],
            "prob": config["prob"],
            "alpha": config["alpha"],
            "n_comparisons": config["n_comparisons"],
            "out_dir": Path(config["out_dir"]),
            "workers": config["workers"],
            "alphabet": Path(config["alphabet"]),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def config_for(self, name: str) -> ConfigSpec:
        if name in self._custom:
            return self._custom[name]
        return resolve(name)

    def to_dict(self) -> Dict[str, Any]:
        """Everything that determines the output bytes; worker count and output location are left out"""
        return {
            "manifest": str(self.manifest) if self.manifest else None,
            "presets": list(self.presets),
            "seed": self.seed,
            "prob": self.prob,
            "epoch": self.epoch,
            "fit": self.fit.value,
            "luma": self.luma,
            "invert": self.invert,
            "custom_presets": {name: {"kind": c.kind.value, "params": _jsonable(c.params)}
                               for name, c in sorted(self._custom.items())},
        }

    def load_manifest(self) -> Manifest:
        if not self.manifest:
            raise UsageError("A manifest is required (--manifest)")
        return load_manifest(self.manifest, load_alphabet(self.alphabet))


def _jsonable(params) -> Dict[str, Any]:
    return {k: (v.value if hasattr(v, "value") else list(v) if isinstance(v, tuple) else v)
            for k, v in sorted(params.items())}


def _write_json(data: Dict[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return path


def cmd_augment(spec: ExperimentSpec) -> Dict[str, Any]:
    """
    Augment and preprocess every manifest record for each preset
    Layout: <out>/run.json and <out>/<preset>/epoch-<k>/{images/, trace.jsonl, manifest.tsv}
    Returns:
        per-preset processed/augmented/errors counts
    """
    manifest = spec.load_manifest()
    handler = DataHandler(workers=spec.workers)
    summary: Dict[str, Any] = {}
    _write_json({**spec.to_dict(), "records": len(manifest.records)}, spec.out_dir / "run.json")

    for preset in spec.presets:
        target = spec.out_dir / preset / f"epoch-{spec.epoch}"
        tasks = handler.build_tasks(manifest, preset, spec.config_for(preset), target, spec.seed,
                                    spec.prob, spec.epoch, spec.fit, spec.luma, spec.invert)
        results = handler.process_records(tasks)
        outcomes = results.pop("outcomes")

        target.mkdir(parents=True, exist_ok=True)
        with open(target / "trace.jsonl", "w", encoding="utf-8", newline="\n") as f:
            for outcome in outcomes:
                if not outcome.error:
                    f.write(outcome.trace_line(preset, spec.seed, spec.epoch) + "\n")
        write_manifest(augmented_manifest(manifest, outcomes), target / "manifest.tsv")
        results["failed"] = [o.record_id for o in outcomes if o.error]
        summary[preset] = results
        logger.info(f"{preset}: {results['processed']} written, {results['augmented']} augmented")

    failed = {p: r["failed"] for p, r in summary.items() if r["failed"]}
    if failed:
        count = sum(len(v) for v in failed.values())
        raise DataError(f"{count} record(s) failed: " +
                        "; ".join(f"{p}: {', '.join(ids[:5])}" for p, ids in failed.items()))
    return summary


def cmd_preview(spec: ExperimentSpec, image: Path, preset: str, count: int) -> Path:
    config = spec.config_for(preset)
    img = read_png(image, luma=spec.luma, invert_intensity=spec.invert)
    sheet = contact_sheet(preview_tiles(config, img, spec.seed, count, spec.fit))
    path = spec.out_dir / f"preview-{preset}.png"
    write_png(sheet, path, text={"seed": str(spec.seed), "preset": preset, "count": str(count)})
    logger.info(f"Preview written to {path}")
    return path


def _line_row(score: LineScore) -> List[Any]:
    c, w = score.chars, score.words
    return [score.record_id, score.split, c.rate, w.rate, c.S, c.D, c.I, c.N, w.S, w.D, w.I, w.N]


def score_predictions(manifest: Manifest, hypotheses: Dict[str, str], split: SplitView = SplitView.POOLED,
                      strict: bool = False) -> Tuple[List[LineScore], List[str]]:
    records = manifest.records
    if split is not SplitView.POOLED:
        records = [r for r in records if r.split.value == split.value]
    missing = sorted(r.record_id for r in records if r.record_id not in hypotheses)
    if missing:
        if strict:
            raise MissingPredictionError(missing)
        logger.warning(f"{len(missing)} record(s) have no prediction and are not scored")
    extra = set(hypotheses) - {r.record_id for r in manifest.records}
    if extra:
        logger.warning(f"{len(extra)} prediction(s) do not match any manifest record")
    scores = [score_line(r.record_id, r.split.value, hypotheses[r.record_id], r.transliteration)
              for r in sorted(records, key=lambda r: r.record_id) if r.record_id in hypotheses]
    return scores, missing


def run_results(scores: Sequence[LineScore], config: str, fold: int, run: int,
                split: SplitView = SplitView.POOLED, mode: ScoreMode = ScoreMode.MICRO) -> List[RunResult]:
    """Pooled and per-split rows for a pooled view, a single row otherwise"""
    views = [split.value]
    if split is SplitView.POOLED:
        views += sorted({s.split for s in scores}, key=[v.value for v in SplitView].index)
    results = []
    for view in views:
        selected = [s for s in scores if view == SplitView.POOLED.value or s.split == view]
        cer, wer = corpus_rates(selected, mode)
        results.append(RunResult(config, fold, run, view, cer, wer))
    return results


def cmd_score(spec: ExperimentSpec, predictions: Path, config: str = BASELINE,
              fold: int = 0, run: int = 0) -> Dict[str, Any]:
    manifest = spec.load_manifest()
    hypotheses = load_hypotheses(predictions, manifest.alphabet)
    scores, missing = score_predictions(manifest, hypotheses, spec.split, spec.strict)

    lines = pd.DataFrame([_line_row(s) for s in scores], columns=LINE_COLUMNS)
    lines_path = spec.out_dir / "lines.csv"
    lines_path.parent.mkdir(parents=True, exist_ok=True)
    lines.to_csv(lines_path, index=False, float_format=FLOAT_FORMAT, encoding="utf-8", lineterminator="\n")

    results = run_results(scores, config, fold, run, spec.split, spec.score_mode)
    results_path = write_results(results, spec.out_dir / "results.csv")
    logger.info(f"Scored {len(scores)} lines for {config} (fold {fold}, run {run})")
    return {
        "scored": len(scores),
        "missing": missing,
        "results": [r.__dict__ for r in results],
        "lines_csv": str(lines_path),
        "results_csv": str(results_path),
    }


def compare_results(results: Sequence[RunResult], spec: ExperimentSpec) -> Report:
    view = [r for r in results if r.split == spec.split.value]
    by_config: Dict[str, List[RunResult]] = {}
    for r in view:
        by_config.setdefault(r.config, []).append(r)
    if BASELINE not in by_config:
        raise MissingBaselineError(f"No {BASELINE} results for split {spec.split.value}")

    aggregates = {c: aggregate(rs, c) for c, rs in by_config.items()}
    verdicts = []
    for config in sorted(by_config, key=order_key):
        if config == BASELINE:
            continue
        for metric in Metric:
            verdicts.append(compare_to_baseline(
                by_config[BASELINE], by_config[config], metric, spec.alpha,
                spec.n_comparisons, spec.pair_on, spec.wilcoxon_mode,
            ))
    return render_report(verdicts, aggregates)


def cmd_compare(spec: ExperimentSpec, results_paths: Sequence[Path]) -> Dict[str, Any]:
    if not results_paths:
        raise UsageError("compare needs at least one results CSV")
    results: List[RunResult] = []
    for path in results_paths:
        results.extend(read_results(path))
    report = compare_results(results, spec)
    paths = report.write(spec.out_dir)
    summary = describe_verdicts(report.verdicts)
    logger.info(f"Compared {len(report.rows) - 1} configs against {BASELINE}: {summary}")
    return {"report": report, "summary": summary, "paths": {k: str(v) for k, v in paths.items()}}


def cmd_validate(spec: ExperimentSpec, check_files: bool = True) -> ValidationReport:
    report = validate_lion_layout(spec.load_manifest(), check_files=check_files)
    if spec.strict and not report.canonical:
        raise DataError(f"Manifest is {report.verdict}: {len(report.deviations)} deviation(s), "
                        f"{len(report.violations)} violation(s), {len(report.missing_files)} missing file(s)")
    return report
