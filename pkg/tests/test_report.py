import random

import pandas as pd
import pytest

from app.core.errors import DataError, MissingBaselineError
from app.core.metrics import aggregate
from app.core.presets import PRESET_ORDER
from app.core.report import NOT_APPLICABLE, VERDICT_COLUMNS, describe_verdicts, mean_std, render_report
from app.core.stats import Direction, Metric, Verdict, compare_to_baseline
from models.experiment import ExperimentSpec, compare_results
from tests.conftest import runs_with


def verdicts_for(baseline, config_results, **kwargs):
    return [compare_to_baseline(baseline, config_results, m, **kwargs) for m in Metric]


def test_mean_std_format():
    assert mean_std(0.31740001, 0.01229) == "0.3174 (0.0123)"
    assert mean_std(0.0, 0.0) == "0.0000 (0.0000)"


def test_golden_rows():
    baseline = runs_with("baseline", 0.3174, 0.0123)
    rot = runs_with("rot1.5", 0.3090, 0.0208)
    report = render_report(verdicts_for(baseline, rot),
                           {"baseline": aggregate(baseline, "baseline"), "rot1.5": aggregate(rot, "rot1.5")})
    first, second = report.rows
    assert (first.config, first.cer, first.cer_cmp, first.wer_cmp) == ("baseline", "0.3174 (0.0123)",
                                                                       NOT_APPLICABLE, NOT_APPLICABLE)
    assert first.wer == "0.5174 (0.0123)"
    assert second.cer == "0.3090 (0.0208)"
    assert second.cer_cmp == Direction.NO_DIFFERENCE.symbol


def test_rows_follow_preset_order():
    results = [r for i, name in enumerate(PRESET_ORDER) for r in runs_with(name, 0.30 + 0.001 * i, 0.01)]
    random.Random(3).shuffle(results)
    report = compare_results(results, ExperimentSpec())
    assert list(report.table()["config"]) == PRESET_ORDER
    assert len(report.rows) == 23
    counts = describe_verdicts(report.verdicts)
    assert sum(counts["cer"].values()) == 22 and sum(counts["wer"].values()) == 22


def test_unknown_configs_sort_after_known_ones():
    results = runs_with("baseline", 0.3, 0.01) + runs_with("zz-custom", 0.3, 0.01) + runs_with("blur", 0.3, 0.01)
    report = compare_results(results, ExperimentSpec())
    assert [r.config for r in report.rows] == ["baseline", "blur", "zz-custom"]


def test_baseline_only():
    report = compare_results(runs_with("baseline", 0.3, 0.01), ExperimentSpec())
    assert len(report.rows) == 1
    assert report.verdicts == []


def test_missing_baseline():
    with pytest.raises(MissingBaselineError):
        compare_results(runs_with("rot5", 0.3, 0.01), ExperimentSpec())
    with pytest.raises(MissingBaselineError):
        render_report([], {})


def test_symbols_for_lower_and_higher():
    baseline = runs_with("baseline", 0.3174, 0.0123, runs=6)
    report = compare_results(baseline + runs_with("rot1.5", 0.2974, 0.0123, runs=6)
                             + runs_with("rot10", 0.3374, 0.0123, runs=6), ExperimentSpec())
    cmp = {r.config: (r.cer_cmp, r.wer_cmp) for r in report.rows}
    assert cmp["rot1.5"] == ("<", "<")
    assert cmp["rot10"] == (">", ">")
    assert describe_verdicts(report.verdicts)["cer"] == {"higher": 1, "lower": 1, "no_difference": 0}


def test_missing_metric_verdict_is_an_error():
    baseline, rot = runs_with("baseline", 0.3, 0.01), runs_with("rot5", 0.3, 0.01)
    only_cer = [compare_to_baseline(baseline, rot, Metric.CER)]
    with pytest.raises(DataError):
        render_report(only_cer, {"baseline": aggregate(baseline, "baseline"), "rot5": aggregate(rot, "rot5")})


def test_orphan_verdict_is_an_error():
    baseline = runs_with("baseline", 0.3, 0.01)
    orphan = Verdict("rot5", Metric.CER, Direction.NO_DIFFERENCE, 1.0, 1.0, 0.3, 0.0, 0.3, 10)
    with pytest.raises(DataError):
        render_report([orphan], {"baseline": aggregate(baseline, "baseline")})


def test_write_creates_text_and_csv(tmp_path):
    baseline = runs_with("baseline", 0.3174, 0.0123)
    report = compare_results(baseline + runs_with("shift", 0.3090, 0.0208), ExperimentSpec())
    paths = report.write(tmp_path / "cmp")
    text = paths["report_txt"].read_text(encoding="utf-8")
    assert text.splitlines()[0].startswith("Config")
    assert "0.3174 (0.0123)" in text and "N/A" in text
    table = pd.read_csv(paths["report_csv"], keep_default_na=False)
    assert list(table["config"]) == ["baseline", "shift"]
    verdicts = pd.read_csv(paths["verdicts_csv"])
    assert list(verdicts.columns) == VERDICT_COLUMNS
    assert list(verdicts["metric"]) == ["cer", "wer"]
