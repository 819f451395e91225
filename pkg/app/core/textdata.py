"""
Alphabet, dataset manifests and the fixed-geometry line preprocessing.

Manifest files are UTF-8, tab separated, one record per line:

    image_path <TAB> fold-or-"-" <TAB> split <TAB> transliteration

The transliteration is the last column because it may contain spaces.
"""
import logging
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.errors import (
    InvalidParameterError,
    ManifestParseError,
    TargetTooLongError,
    TooWideError,
    UnknownSymbolError,
)
from app.core.raster import Anchor, GrayImage, pad_to, resize, resize_height, round_half_up

logger = logging.getLogger(__name__)

LINE_HEIGHT = 64
LINE_WIDTH = 1362
TARGET_LENGTH = 271
BLANK_INDEX = 0

NUM_FOLDS = 5
FOLD_SIZE = 306
TEST_IN_DOMAIN_SIZE = 474
TEST_OUT_OF_DOMAIN_SIZE = 191

DEFAULT_ALPHABET_PATH = Path(__file__).resolve().parents[2] / "assets" / "alphabet.txt"


class Split(Enum):
    CV = "cv"
    TEST_IN_DOMAIN = "test_in_domain"
    TEST_OUT_OF_DOMAIN = "test_out_of_domain"


class FitMode(Enum):
    ERROR = "error"
    SHRINK = "shrink"


def normalize_text(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class Alphabet:
    """Ordered symbol inventory; index 0 is the CTC blank, symbols take 1..N"""
    symbols: Tuple[str, ...]
    blank_index: int = BLANK_INDEX

    def __post_init__(self):
        symbols = tuple(normalize_text(s) for s in self.symbols)
        duplicates = [s for s, n in Counter(symbols).items() if n > 1]
        if duplicates:
            raise InvalidParameterError(f"Duplicate alphabet symbols: {duplicates}")
        if any(len(s) != 1 for s in symbols):
            raise InvalidParameterError("Alphabet symbols must be single characters")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {s: i + 1 for i, s in enumerate(symbols)})

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def num_classes(self) -> int:
        return len(self.symbols) + 1

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    def lookup(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise UnknownSymbolError(symbol, -1) from None

    def symbol(self, index: int) -> str:
        if not 1 <= index <= len(self.symbols):
            raise InvalidParameterError(f"Index {index} is not a symbol index (1..{len(self.symbols)})")
        return self.symbols[index - 1]


def load_alphabet(path: Union[str, Path, None] = None) -> Alphabet:
    """One symbol per line in index order; blank lines are skipped, a line holding one space is the space symbol"""
    path = Path(path) if path else DEFAULT_ALPHABET_PATH
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().split("\n")
    symbols = [normalize_text(line.rstrip("\r")) for line in lines if line.rstrip("\r") != ""]
    return Alphabet(tuple(symbols))


@dataclass(frozen=True)
class LineRecord:
    image_path: str
    transliteration: str
    fold: Optional[int]
    split: Split

    @property
    def record_id(self) -> str:
        return Path(self.image_path).name.split(".")[0]


@dataclass
class Manifest:
    records: List[LineRecord]
    alphabet: Alphabet
    base_dir: Path = field(default_factory=Path)

    def by_split(self, *splits: Split) -> List[LineRecord]:
        return [r for r in self.records if r.split in splits]

    def resolve(self, record: LineRecord) -> Path:
        path = Path(record.image_path)
        return path if path.is_absolute() else self.base_dir / path


def preprocess_line(img: GrayImage, fit: FitMode = FitMode.ERROR) -> GrayImage:
    """
    Normalise a line to height 64 and left-anchor it on a black 1362x64 canvas
    Args:
        img: line image
        fit: ERROR raises TooWideError for lines wider than 1362 px after
             scaling; SHRINK rescales them to fit and centres them vertically
    Returns:
        1362x64 GrayImage
    """
    scaled = resize_height(img, LINE_HEIGHT)
    if scaled.width > LINE_WIDTH:
        if FitMode(fit) is FitMode.ERROR:
            raise TooWideError(scaled.width, LINE_WIDTH)
        new_h = max(1, round_half_up(img.height * LINE_WIDTH / img.width))
        scaled = resize(img, LINE_WIDTH, min(new_h, LINE_HEIGHT))
        return pad_to(scaled, LINE_WIDTH, LINE_HEIGHT, Anchor.CENTER_VERTICAL)
    return pad_to(scaled, LINE_WIDTH, LINE_HEIGHT, Anchor.TOP_LEFT)


def encode_target(text: str, alphabet: Alphabet, length: int = TARGET_LENGTH) -> np.ndarray:
    text = normalize_text(text)
    if len(text) > length:
        raise TargetTooLongError(f"Target has {len(text)} symbols, limit is {length}")
    target = np.zeros(length, dtype=np.int64)
    for position, char in enumerate(text):
        if char not in alphabet:
            raise UnknownSymbolError(char, position)
        target[position] = alphabet.lookup(char)
    return target


def decode_target(target: Sequence[int], alphabet: Alphabet) -> str:
    return "".join(alphabet.symbol(int(i)) for i in target if int(i) != BLANK_INDEX)


def _parse_record(line: str, line_number: int) -> LineRecord:
    parts = line.split("\t", 3)
    if len(parts) != 4:
        raise ManifestParseError(line_number, f"expected 4 tab-separated columns, got {len(parts)}")
    image_path, fold_raw, split_raw, text = parts
    if not image_path:
        raise ManifestParseError(line_number, "empty image path")
    if fold_raw == "-":
        fold = None
    else:
        try:
            fold = int(fold_raw)
        except ValueError:
            raise ManifestParseError(line_number, f"fold must be an integer or '-', got {fold_raw!r}") from None
        if not 0 <= fold < NUM_FOLDS:
            raise ManifestParseError(line_number, f"fold {fold} outside 0..{NUM_FOLDS - 1}")
    try:
        split = Split(split_raw)
    except ValueError:
        raise ManifestParseError(line_number, f"unknown split {split_raw!r}") from None
    if split is Split.CV and fold is None:
        raise ManifestParseError(line_number, "cross-validation records need a fold")
    return LineRecord(image_path, normalize_text(text), fold, split)


def load_manifest(path: Union[str, Path], alphabet: Optional[Alphabet] = None) -> Manifest:
    path = Path(path)
    alphabet = alphabet or load_alphabet()
    records = []
    with open(path, "rb") as f:
        for line_number, raw in enumerate(f, start=1):
            try:
                line = raw.decode("utf-8").rstrip("\n").rstrip("\r")
            except UnicodeDecodeError:
                raise ManifestParseError(line_number, "invalid UTF-8") from None
            if not line.strip():
                continue
            records.append(_parse_record(line, line_number))
    logger.info(f"Loaded {len(records)} records from {path}")
    return Manifest(records=records, alphabet=alphabet, base_dir=path.parent)


def write_manifest(manifest: Manifest, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in manifest.records:
            fold = "-" if r.fold is None else str(r.fold)
            f.write(f"{r.image_path}\t{fold}\t{r.split.value}\t{r.transliteration}\n")
    return path


@dataclass
class ValidationReport:
    verdict: str
    fold_sizes: Dict[int, int]
    split_counts: Dict[str, int]
    deviations: List[str] = field(default_factory=list)
    violations: List[Tuple[int, str]] = field(default_factory=list)
    missing_files: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def canonical(self) -> bool:
        return self.verdict == "canonical"

    def to_dict(self) -> Dict:
        return {
            "verdict": self.verdict,
            "fold_sizes": {str(k): v for k, v in sorted(self.fold_sizes.items())},
            "split_counts": self.split_counts,
            "deviations": self.deviations,
            "violations": [{"record": i, "message": m} for i, m in self.violations],
            "missing_files": [{"record": i, "path": p} for i, p in self.missing_files],
        }


def validate_lion_layout(manifest: Manifest, check_files: bool = False) -> ValidationReport:
    """Compare a manifest against the canonical 5x306 / 474 / 191 layout; never raises on deviations"""
    fold_sizes = Counter(r.fold for r in manifest.records if r.split is Split.CV)
    split_counts = {s.value: 0 for s in Split}
    for r in manifest.records:
        split_counts[r.split.value] += 1

    deviations = []
    for fold in range(NUM_FOLDS):
        size = fold_sizes.get(fold, 0)
        if size != FOLD_SIZE:
            deviations.append(f"fold {fold}: {size} lines, expected {FOLD_SIZE}")
    expected_tests = {
        Split.TEST_IN_DOMAIN.value: TEST_IN_DOMAIN_SIZE,
        Split.TEST_OUT_OF_DOMAIN.value: TEST_OUT_OF_DOMAIN_SIZE,
    }
    for split, expected in expected_tests.items():
        if split_counts[split] != expected:
            deviations.append(f"{split}: {split_counts[split]} lines, expected {expected}")

    violations = []
    seen: Dict[str, int] = {}
    for index, record in enumerate(manifest.records):
        for position, char in enumerate(record.transliteration):
            if char not in manifest.alphabet:
                violations.append((index, f"unknown symbol {char!r} at position {position}"))
        if len(record.transliteration) > TARGET_LENGTH:
            violations.append((index, f"transliteration has {len(record.transliteration)} symbols, limit {TARGET_LENGTH}"))
        if record.record_id in seen:
            violations.append((index, f"duplicate record id {record.record_id} (first at record {seen[record.record_id]})"))
        seen.setdefault(record.record_id, index)

    missing = []
    if check_files:
        missing = [(i, str(manifest.resolve(r))) for i, r in enumerate(manifest.records)
                   if not manifest.resolve(r).is_file()]
        for index, p in missing:
            logger.error(f"Record {index}: image file missing: {p}")

    verdict = "canonical" if not (deviations or violations or missing) else "non-canonical"
    report = ValidationReport(verdict, dict(fold_sizes), split_counts, deviations, violations, missing)
    logger.info(f"Manifest validation: {verdict} ({len(deviations)} deviations, {len(violations)} violations)")
    return report
