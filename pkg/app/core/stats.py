"""
Paired Wilcoxon signed-rank test, Bonferroni correction and verdicts of a
configuration against the baseline.

Zero differences are dropped (Wilcoxon's rule), tied magnitudes get midranks,
the statistic is W = min(W+, W-) and p-values are two-sided. The exact null
distribution is built by counting sign assignments over the (possibly tied)
ranks, which is equivalent to enumerating all 2^n patterns.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats as sps

from app.core.errors import DataError, DegenerateSampleError, InvalidParameterError, PairingError
from app.core.metrics import RunResult

logger = logging.getLogger(__name__)

EXACT_MAX_N = 25
DEFAULT_ALPHA = 0.01
DEFAULT_N_COMPARISONS = 22


class WilcoxonMode(Enum):
    EXACT = "exact"
    NORMAL_APPROX = "normal_approx"
    AUTO = "auto"


class PairOn(Enum):
    RUN = "run"
    FOLD_MEAN = "fold-mean"


class Metric(Enum):
    CER = "cer"
    WER = "wer"


class Direction(Enum):
    HIGHER = "higher"
    LOWER = "lower"
    NO_DIFFERENCE = "no_difference"

    @property
    def symbol(self) -> str:
        return {"higher": ">", "lower": "<", "no_difference": "-"}[self.value]


@dataclass(frozen=True)
class PairedSample:
    labels: Tuple[Hashable, ...]
    a: Tuple[float, ...]
    b: Tuple[float, ...]

    def __post_init__(self):
        if not (len(self.labels) == len(self.a) == len(self.b)) or len(self.a) < 1:
            raise InvalidParameterError("Paired sample needs equally long, non-empty a, b and labels")
        if len(set(self.labels)) != len(self.labels):
            raise InvalidParameterError("Pairing keys must be unique")

    @classmethod
    def from_arrays(cls, a: Sequence[float], b: Sequence[float], labels=None) -> "PairedSample":
        labels = tuple(labels) if labels is not None else tuple(range(len(a)))
        return cls(labels, tuple(float(x) for x in a), tuple(float(x) for x in b))

    def differences(self) -> np.ndarray:
        return np.asarray(self.a, dtype=np.float64) - np.asarray(self.b, dtype=np.float64)


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_value: float
    n: int
    w_plus: float
    w_minus: float
    mode: WilcoxonMode


def signed_ranks(s: PairedSample) -> Tuple[np.ndarray, np.ndarray]:
    """Midranks of |d| over the non-zero differences, and the signs of those differences"""
    d = s.differences()
    d = d[d != 0]
    if d.size == 0:
        raise DegenerateSampleError("All paired differences are zero; the test carries no evidence")
    return sps.rankdata(np.abs(d), method="average"), np.sign(d)


def _exact_counts(doubled_ranks: np.ndarray) -> np.ndarray:
    # counts[s] = number of sign patterns whose doubled positive rank sum equals s
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for r in doubled_ranks:
        r = int(r)
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts = counts + shifted
    return counts


def exact_p_value(ranks: np.ndarray, statistic: float) -> float:
    doubled = np.rint(ranks * 2).astype(np.int64)
    total = int(doubled.sum())
    counts = _exact_counts(doubled)
    w2 = int(round(statistic * 2))
    s = np.arange(total + 1)
    extreme = np.minimum(s, total - s) <= w2
    hits = int(sum(counts[extreme]))
    return hits / (2 ** len(ranks))


def normal_p_value(ranks: np.ndarray, statistic: float) -> float:
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_sizes ** 3 - tie_sizes) / 48.0
    if var <= 0:
        return 1.0
    z = max(0.0, abs(statistic - mean) - 0.5) / np.sqrt(var)
    return float(min(1.0, 2.0 * sps.norm.sf(z)))


def wilcoxon_signed_rank(s: PairedSample, mode: WilcoxonMode = WilcoxonMode.AUTO) -> WilcoxonResult:
    ranks, signs = signed_ranks(s)
    w_plus = float(ranks[signs > 0].sum())
    w_minus = float(ranks[signs < 0].sum())
    statistic = min(w_plus, w_minus)
    mode = WilcoxonMode(mode)
    if mode is WilcoxonMode.AUTO:
        mode = WilcoxonMode.EXACT if len(ranks) <= EXACT_MAX_N else WilcoxonMode.NORMAL_APPROX
    if mode is WilcoxonMode.EXACT:
        p = exact_p_value(ranks, statistic)
    else:
        p = normal_p_value(ranks, statistic)
    return WilcoxonResult(statistic, p, len(ranks), w_plus, w_minus, mode)


def bonferroni(p: float, n: int) -> float:
    if not 0 <= p <= 1:
        raise InvalidParameterError(f"p must lie in [0, 1], got {p}")
    if n < 1:
        raise InvalidParameterError(f"Number of comparisons must be >= 1, got {n}")
    return min(1.0, p * n)


@dataclass(frozen=True)
class Verdict:
    config: str
    metric: Metric
    direction: Direction
    p_raw: float
    p_adjusted: float
    mean: float
    std: float
    baseline_mean: float
    n_pairs: int

    def to_row(self) -> Dict:
        return {
            "config": self.config,
            "metric": self.metric.value,
            "mean": self.mean,
            "std": self.std,
            "p_raw": self.p_raw,
            "p_adjusted": self.p_adjusted,
            "direction": self.direction.value,
        }


def _keyed_values(results: Sequence[RunResult], metric: Metric, pair_on: PairOn) -> Dict[Hashable, float]:
    by_run: Dict[Tuple[int, int], float] = {}
    for r in results:
        key = (r.fold, r.run)
        if key in by_run:
            raise DataError(f"Config {r.config}: duplicate result for fold {r.fold}, run {r.run}, split {r.split}")
        by_run[key] = getattr(r, metric.value)
    if PairOn(pair_on) is PairOn.RUN:
        return by_run
    folds: Dict[int, List[float]] = {}
    for (fold, _), value in sorted(by_run.items()):
        folds.setdefault(fold, []).append(value)
    return {fold: float(np.mean(values)) for fold, values in folds.items()}


def paired_sample(baseline: Sequence[RunResult], config_results: Sequence[RunResult],
                  metric: Metric, pair_on: PairOn = PairOn.RUN) -> PairedSample:
    """Align config (a) and baseline (b) values on (fold, run) or fold keys"""
    base = _keyed_values(baseline, Metric(metric), pair_on)
    conf = _keyed_values(config_results, Metric(metric), pair_on)
    unmatched = set(base) ^ set(conf)
    if unmatched:
        raise PairingError(unmatched)
    keys = tuple(sorted(base))
    return PairedSample(keys, tuple(conf[k] for k in keys), tuple(base[k] for k in keys))


def _direction(a: np.ndarray, b: np.ndarray, test: Optional[WilcoxonResult]) -> Direction:
    # equal means fall back to the signed rank balance
    for value in (a.mean() - b.mean(), test.w_plus - test.w_minus if test else 0.0):
        if value > 0:
            return Direction.HIGHER
        if value < 0:
            return Direction.LOWER
    return Direction.NO_DIFFERENCE


def compare_to_baseline(baseline: Sequence[RunResult], config_results: Sequence[RunResult],
                        metric: Metric = Metric.CER, alpha: float = DEFAULT_ALPHA,
                        n_comparisons: int = DEFAULT_N_COMPARISONS, pair_on: PairOn = PairOn.RUN,
                        mode: WilcoxonMode = WilcoxonMode.AUTO) -> Verdict:
    """
    Paired Wilcoxon comparison of one config against the baseline on one metric
    Args:
        baseline: baseline runs
        config_results: runs of the compared config
        metric: CER or WER
        alpha: significance level applied to the Bonferroni adjusted p
        n_comparisons: Bonferroni factor
        pair_on: pair single runs or per-fold means
        mode: exact, normal approximation or automatic choice
    Returns:
        Verdict; a significant result is HIGHER or LOWER by the sign of the mean
        config minus baseline difference, and on equal means by the sign of
        W+ - W-
    """
    if not config_results:
        raise DataError("No results for the compared config")
    metric = Metric(metric)
    config = config_results[0].config
    sample = paired_sample(baseline, config_results, metric, pair_on)
    a, b = np.asarray(sample.a), np.asarray(sample.b)
    test = None
    try:
        test = wilcoxon_signed_rank(sample, mode)
        p_raw = test.p_value
    except DegenerateSampleError:
        logger.info(f"{config}/{metric.value}: all differences are zero, reporting no difference")
        p_raw = 1.0
    p_adjusted = bonferroni(p_raw, n_comparisons)

    direction = _direction(a, b, test) if p_adjusted < alpha else Direction.NO_DIFFERENCE

    config_values = np.array([getattr(r, metric.value) for r in config_results])
    std = float(np.std(config_values, ddof=1)) if config_values.size > 1 else 0.0
    verdict = Verdict(config, metric, direction, p_raw, p_adjusted, float(config_values.mean()), std,
                      float(np.mean([getattr(r, metric.value) for r in baseline])), len(sample.a))
    logger.info(f"{config}/{metric.value}: p_raw={p_raw:.3g} p_adj={p_adjusted:.3g} -> {direction.value}")
    return verdict
