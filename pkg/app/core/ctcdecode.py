"""
Best-path (greedy) CTC decoding and the plain-text logit matrix format.

Single matrix file:
    T C
    T lines of C space-separated reals

Container file:
    N
    then N blocks, each a line holding the record id followed by a matrix
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np

from app.core.errors import DimensionMismatchError, MatrixFormatError
from app.core.textdata import BLANK_INDEX, Alphabet

logger = logging.getLogger(__name__)

MATRIX_SUFFIX = ".logits"


@dataclass(frozen=True, eq=False)
class LogitMatrix:
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise MatrixFormatError(f"Expected a T x C matrix, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 2:
            raise MatrixFormatError(f"Need T >= 1 and C >= 2, got {values.shape[0]} x {values.shape[1]}")
        if not np.all(np.isfinite(values)):
            raise MatrixFormatError("Matrix contains NaN or infinite values")
        object.__setattr__(self, "values", values)

    @property
    def T(self) -> int:
        return int(self.values.shape[0])

    @property
    def C(self) -> int:
        return int(self.values.shape[1])


def best_path(m: LogitMatrix) -> np.ndarray:
    # np.argmax returns the first maximum, so ties go to the lowest class index
    return np.argmax(m.values, axis=1)


def collapse(path: Iterable[int]) -> List[int]:
    """Merge adjacent repeats, then drop blanks"""
    labels = []
    previous = None
    for label in path:
        label = int(label)
        if label != previous and label != BLANK_INDEX:
            labels.append(label)
        previous = label
    return labels


def best_path_decode(m: LogitMatrix, alphabet: Alphabet) -> str:
    if m.C != alphabet.num_classes:
        raise DimensionMismatchError(
            f"Matrix has {m.C} classes, alphabet needs {alphabet.num_classes} (including blank)"
        )
    return "".join(alphabet.symbol(i) for i in collapse(best_path(m)))


def _parse_matrix(lines: List[str], start: int, source) -> Tuple[LogitMatrix, int]:
    try:
        t, c = (int(x) for x in lines[start].split())
    except (ValueError, IndexError):
        raise MatrixFormatError(f"{source}: line {start + 1}: expected header 'T C'") from None
    rows = lines[start + 1:start + 1 + t]
    if len(rows) != t:
        raise MatrixFormatError(f"{source}: expected {t} rows, found {len(rows)}")
    try:
        values = np.array([[float(x) for x in row.split()] for row in rows], dtype=np.float64)
    except ValueError as e:
        raise MatrixFormatError(f"{source}: non-numeric value ({e})") from None
    if values.shape != (t, c):
        raise MatrixFormatError(f"{source}: expected {t}x{c} values, got shape {values.shape}")
    return LogitMatrix(values), start + 1 + t


def _read_lines(path: Path) -> List[str]:
    data = path.read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        line_number = data.count(b"\n", 0, e.start) + 1
        raise MatrixFormatError(f"{path}, line {line_number}: invalid UTF-8") from None
    return [line for line in text.splitlines() if line.strip()]


def read_matrix(path: Union[str, Path]) -> LogitMatrix:
    path = Path(path)
    matrix, _ = _parse_matrix(_read_lines(path), 0, path)
    return matrix


def write_matrix(m: LogitMatrix, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(_format_matrix(m))
    return path


def _format_matrix(m: LogitMatrix) -> str:
    rows = [" ".join(repr(float(v)) for v in row) for row in m.values]
    return f"{m.T} {m.C}\n" + "\n".join(rows) + "\n"


def read_container(path: Union[str, Path]) -> Dict[str, LogitMatrix]:
    path = Path(path)
    lines = _read_lines(path)
    try:
        count = int(lines[0])
    except (ValueError, IndexError):
        raise MatrixFormatError(f"{path}: first line must hold the record count") from None
    matrices: Dict[str, LogitMatrix] = {}
    cursor = 1
    for _ in range(count):
        if cursor >= len(lines):
            raise MatrixFormatError(f"{path}: header announces {count} records, found {len(matrices)}")
        record_id = lines[cursor].strip()
        matrices[record_id], cursor = _parse_matrix(lines, cursor + 1, path)
    return matrices


def write_container(matrices: Dict[str, LogitMatrix], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{len(matrices)}\n")
        for record_id in sorted(matrices):
            f.write(f"{record_id}\n{_format_matrix(matrices[record_id])}")
    return path


def decode_batch(matrices: Dict[str, LogitMatrix], alphabet: Alphabet) -> Dict[str, str]:
    return {record_id: best_path_decode(m, alphabet) for record_id, m in sorted(matrices.items())}
