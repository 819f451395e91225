"""
Comparison report: mean (std) CER and WER per configuration with the verdict
against the baseline, in preset order, as an aligned text table and as CSV.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Union

import pandas as pd

from app.core.errors import DataError, MissingBaselineError
from app.core.metrics import FLOAT_FORMAT, Aggregate
from app.core.presets import BASELINE, order_key
from app.core.stats import Direction, Metric, Verdict

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["config", "cer", "cer_cmp", "wer", "wer_cmp"]
VERDICT_COLUMNS = ["config", "metric", "mean", "std", "p_raw", "p_adjusted", "direction"]
NOT_APPLICABLE = "N/A"


def mean_std(mean: float, std: float) -> str:
    return f"{mean:.4f} ({std:.4f})"


@dataclass
class ReportRow:
    config: str
    cer: str
    cer_cmp: str
    wer: str
    wer_cmp: str


@dataclass
class Report:
    rows: List[ReportRow]
    verdicts: List[Verdict] = field(default_factory=list)

    def table(self) -> pd.DataFrame:
        return pd.DataFrame([[r.config, r.cer, r.cer_cmp, r.wer, r.wer_cmp] for r in self.rows],
                            columns=REPORT_COLUMNS)

    def verdict_frame(self) -> pd.DataFrame:
        return pd.DataFrame([v.to_row() for v in self.verdicts], columns=VERDICT_COLUMNS)

    @property
    def text(self) -> str:
        table = self.table()
        table.columns = ["Config", "CER mean (std)", "CER", "WER mean (std)", "WER"]
        return table.to_string(index=False, justify="left") + "\n"

    def write(self, out_dir: Union[str, Path]) -> Dict[str, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {
            "report_txt": out_dir / "report.txt",
            "report_csv": out_dir / "report.csv",
            "verdicts_csv": out_dir / "verdicts.csv",
        }
        with open(paths["report_txt"], "w", encoding="utf-8", newline="\n") as f:
            f.write(self.text)
        self.table().to_csv(paths["report_csv"], index=False, encoding="utf-8", lineterminator="\n")
        self.verdict_frame().to_csv(paths["verdicts_csv"], index=False, float_format=FLOAT_FORMAT,
                                    encoding="utf-8", lineterminator="\n")
        logger.info(f"Report written to {out_dir}")
        return paths


def render_report(verdicts: Sequence[Verdict], aggregates: Mapping[str, Aggregate]) -> Report:
    """
    Build the comparison report
    Args:
        verdicts: one CER and one WER verdict per non-baseline config
        aggregates: per-config run aggregates, the baseline included
    Returns:
        Report with the baseline first and the remaining configs in preset order
    """
    if BASELINE not in aggregates:
        raise MissingBaselineError(f"No results for the {BASELINE} configuration")

    by_key: Dict[tuple, Verdict] = {}
    for v in verdicts:
        if v.config == BASELINE:
            continue
        by_key[(v.config, v.metric)] = v

    orphans = sorted({c for c, _ in by_key} - set(aggregates))
    if orphans:
        raise DataError(f"Verdicts without aggregates: {', '.join(orphans)}")

    rows = []
    for config in sorted(aggregates, key=order_key):
        agg = aggregates[config]
        if config == BASELINE:
            cer_cmp = wer_cmp = NOT_APPLICABLE
        else:
            missing = [m.value for m in Metric if (config, m) not in by_key]
            if missing:
                raise DataError(f"Config {config}: no {' / '.join(missing)} verdict")
            cer_cmp = by_key[(config, Metric.CER)].direction.symbol
            wer_cmp = by_key[(config, Metric.WER)].direction.symbol
        rows.append(ReportRow(config, mean_std(agg.mean_cer, agg.std_cer), cer_cmp,
                              mean_std(agg.mean_wer, agg.std_wer), wer_cmp))

    ordered = sorted(by_key.values(), key=lambda v: (order_key(v.config), v.metric.value))
    return Report(rows=rows, verdicts=ordered)


def describe_verdicts(verdicts: Sequence[Verdict]) -> Dict[str, Dict[str, int]]:
    """Counts of higher / lower / no-difference verdicts per metric"""
    summary = {m.value: {d.value: 0 for d in Direction} for m in Metric}
    for v in verdicts:
        summary[v.metric.value][v.direction.value] += 1
    return summary
