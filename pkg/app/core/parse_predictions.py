"""
Loading recognizer output: hypothesis TSV files (record_id<TAB>hypothesis) and
logit matrices, either a directory of <record_id>.logits files or a single
record-count container, which are decoded with best-path decoding.

Malformed lines and unreadable matrices are logged and skipped; the caller
sees them as missing predictions.
"""
import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

from app.core.ctcdecode import MATRIX_SUFFIX, best_path_decode, read_container, read_matrix
from app.core.errors import DataError
from app.core.textdata import Alphabet, normalize_text

logger = logging.getLogger(__name__)

Source = Union[str, Path]


def _decode(data: bytes, name: str) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        line_number = data.count(b"\n", 0, e.start) + 1
        raise DataError(f"{name}, line {line_number}: invalid UTF-8") from None


def _read_text(source) -> Tuple[str, str]:
    # uploaded files (web page) expose getvalue(), paths are read from disk
    if hasattr(source, "getvalue"):
        return source.name, _decode(source.getvalue(), source.name)
    path = Path(source)
    return path.name, _decode(path.read_bytes(), path.name)


def parse_prediction_text(content: str, source_name: str = "<predictions>") -> Dict[str, str]:
    predictions: Dict[str, str] = {}
    skipped = 0
    for line_number, raw in enumerate(content.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if "\t" not in line:
            logger.error(f"{source_name}: line {line_number}: expected record_id<TAB>hypothesis, skipping")
            skipped += 1
            continue
        record_id, hypothesis = line.split("\t", 1)
        record_id = record_id.strip()
        if record_id in predictions:
            raise DataError(f"{source_name}: line {line_number}: duplicate prediction for {record_id}")
        predictions[record_id] = normalize_text(hypothesis)
    logger.info(f"Read {len(predictions)} predictions from {source_name} ({skipped} skipped)")
    return predictions


def read_predictions(source) -> Dict[str, str]:
    name, content = _read_text(source)
    return parse_prediction_text(content, name)


def write_predictions(predictions: Dict[str, str], path: Source) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record_id in sorted(predictions):
            f.write(f"{record_id}\t{predictions[record_id]}\n")
    return path


def decode_logits_dir(directory: Source, alphabet: Alphabet) -> Dict[str, str]:
    directory = Path(directory)
    files: List[Path] = sorted(directory.glob(f"*{MATRIX_SUFFIX}"))
    if not files:
        logger.warning(f"No {MATRIX_SUFFIX} files found in {directory}")
    hypotheses: Dict[str, str] = {}
    for file in files:
        try:
            hypotheses[file.name.split(".")[0]] = best_path_decode(read_matrix(file), alphabet)
        except DataError as e:
            logger.error(f"Error decoding {file.name}: {e}")
            continue
    logger.info(f"Decoded {len(hypotheses)} of {len(files)} logit files from {directory}")
    return hypotheses


def decode_logits_container(path: Source, alphabet: Alphabet) -> Dict[str, str]:
    hypotheses: Dict[str, str] = {}
    for record_id, matrix in sorted(read_container(path).items()):
        try:
            hypotheses[record_id] = best_path_decode(matrix, alphabet)
        except DataError as e:
            logger.error(f"Error decoding {record_id} in {path}: {e}")
    return hypotheses


def load_hypotheses(source: Source, alphabet: Alphabet) -> Dict[str, str]:
    """Hypotheses from a TSV file, a logits directory or a logits container"""
    path = Path(source)
    if path.is_dir():
        return decode_logits_dir(path, alphabet)
    if not path.is_file():
        raise DataError(f"Predictions not found: {path}")
    if path.suffix == MATRIX_SUFFIX:
        return decode_logits_container(path, alphabet)
    return read_predictions(path)
