"""
Edit-distance based character and word error rates, run aggregation and the
results CSV (config,fold,run,split,cer,wer).

Counts describe converting the hypothesis into the reference: a reference
token missing from the hypothesis is an insertion, a surplus hypothesis token
is a deletion. Among all minimal alignments the one with the most
substitutions is reported; the total S + D + I is the same for all of them.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.core.errors import DataError, EmptySelectionError, UndefinedRateError

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ["config", "fold", "run", "split", "cer", "wer"]
RESULT_SPLITS = ("pooled", "cv", "test_in_domain", "test_out_of_domain")
FLOAT_FORMAT = "%.6f"


class ScoreMode(Enum):
    MICRO = "micro"
    MACRO = "macro"


@dataclass(frozen=True)
class ErrorCounts:
    S: int
    D: int
    I: int
    N: int

    @property
    def total(self) -> int:
        return self.S + self.D + self.I

    @property
    def rate(self) -> float:
        if self.N == 0:
            if self.total == 0:
                return 0.0
            raise UndefinedRateError(f"Empty reference with {self.total} error(s): rate is undefined")
        return self.total / self.N

    def __add__(self, other: "ErrorCounts") -> "ErrorCounts":
        return ErrorCounts(self.S + other.S, self.D + other.D, self.I + other.I, self.N + other.N)


def edit_distance(a: Sequence, b: Sequence) -> ErrorCounts:
    """
    Minimal Levenshtein alignment of hypothesis a into reference b
    Args:
        a: hypothesis tokens
        b: reference tokens
    Returns:
        ErrorCounts with N = len(b)
    """
    n, m = len(a), len(b)
    # lexicographic cost: fewest edits first, then most substitutions
    cost = np.zeros((n + 1, m + 1), dtype=np.int64)
    subs = np.zeros((n + 1, m + 1), dtype=np.int64)
    cost[:, 0] = np.arange(n + 1)
    cost[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            mismatch = 0 if a[i - 1] == b[j - 1] else 1
            candidates = (
                (cost[i - 1, j - 1] + mismatch, -(subs[i - 1, j - 1] + mismatch)),
                (cost[i - 1, j] + 1, -subs[i - 1, j]),
                (cost[i, j - 1] + 1, -subs[i, j - 1]),
            )
            best = min(candidates)
            cost[i, j] = best[0]
            subs[i, j] = -best[1]

    total, s = int(cost[n, m]), int(subs[n, m])
    # every alignment satisfies D - I = len(a) - len(b)
    d = (total - s + (n - m)) // 2
    i_count = total - s - d
    return ErrorCounts(S=s, D=d, I=i_count, N=m)


def tokenize_words(text: str) -> List[str]:
    return text.split()


def char_counts(hyp: str, ref: str) -> ErrorCounts:
    return edit_distance(list(hyp), list(ref))


def word_counts(hyp: str, ref: str) -> ErrorCounts:
    return edit_distance(tokenize_words(hyp), tokenize_words(ref))


def cer(hyp: str, ref: str) -> float:
    return char_counts(hyp, ref).rate


def wer(hyp: str, ref: str) -> float:
    return word_counts(hyp, ref).rate


@dataclass(frozen=True)
class LineScore:
    record_id: str
    split: str
    chars: ErrorCounts
    words: ErrorCounts

    @property
    def cer(self) -> float:
        return self.chars.rate

    @property
    def wer(self) -> float:
        return self.words.rate


def score_line(record_id: str, split: str, hyp: str, ref: str) -> LineScore:
    return LineScore(record_id, split, char_counts(hyp, ref), word_counts(hyp, ref))


def corpus_rates(scores: Sequence[LineScore], mode: ScoreMode = ScoreMode.MICRO) -> Tuple[float, float]:
    """CER and WER over a set of lines, micro (pooled counts) or macro (mean of line rates)"""
    if not scores:
        raise EmptySelectionError("No scored lines to aggregate")
    if ScoreMode(mode) is ScoreMode.MICRO:
        chars = sum((s.chars for s in scores), ErrorCounts(0, 0, 0, 0))
        words = sum((s.words for s in scores), ErrorCounts(0, 0, 0, 0))
        return chars.rate, words.rate
    return float(np.mean([s.cer for s in scores])), float(np.mean([s.wer for s in scores]))


@dataclass(frozen=True)
class RunResult:
    config: str
    fold: int
    run: int
    split: str
    cer: float
    wer: float

    def __post_init__(self):
        if not (np.isfinite(self.cer) and np.isfinite(self.wer)) or self.cer < 0 or self.wer < 0:
            raise DataError(f"Rates must be finite and >= 0, got cer={self.cer} wer={self.wer}")
        if self.split not in RESULT_SPLITS:
            raise DataError(f"Unknown result split {self.split!r}")


@dataclass(frozen=True)
class Aggregate:
    config: str
    n: int
    mean_cer: float
    std_cer: float
    mean_wer: float
    std_wer: float

    @property
    def single(self) -> bool:
        """std is reported as 0 when only one run exists"""
        return self.n == 1


def _sample_std(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1)) if values.size > 1 else 0.0


def aggregate(results: Iterable[RunResult], config: str, split: Optional[str] = None) -> Aggregate:
    selected = sorted(
        (r for r in results if r.config == config and (split is None or r.split == split)),
        key=lambda r: (r.fold, r.run, r.split),
    )
    if not selected:
        raise EmptySelectionError(f"No results for config {config!r}")
    cers = np.array([r.cer for r in selected])
    wers = np.array([r.wer for r in selected])
    return Aggregate(config, len(selected), float(cers.mean()), _sample_std(cers),
                     float(wers.mean()), _sample_std(wers))


def results_frame(results: Iterable[RunResult]) -> pd.DataFrame:
    rows = [[r.config, r.fold, r.run, r.split, r.cer, r.wer] for r in results]
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


def write_results(results: Iterable[RunResult], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    results_frame(results).to_csv(path, index=False, float_format=FLOAT_FORMAT, encoding="utf-8", lineterminator="\n")
    return path


def read_results(source) -> List[RunResult]:
    """Results from a CSV path or an open file-like object (e.g. an upload)"""
    path = Path(source) if isinstance(source, (str, Path)) else source
    name = getattr(path, "name", str(path))
    df = pd.read_csv(path, dtype={"config": str, "split": str}, encoding="utf-8")
    missing = [c for c in RESULT_COLUMNS if c not in df.columns]
    if missing:
        raise DataError(f"{name}: missing column(s) {', '.join(missing)}")
    results = [
        RunResult(str(row.config), int(row.fold), int(row.run), str(row.split), float(row.cer), float(row.wer))
        for row in df.itertuples(index=False)
    ]
    logger.info(f"Read {len(results)} run results from {name}")
    return results
