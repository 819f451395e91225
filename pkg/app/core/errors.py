"""
Exception hierarchy shared by the core modules and the CLI.

Data problems derive from ``DataError`` (exit code 2), usage problems from
``UsageError`` (exit code 1). Anything else reaching the CLI is internal (3).
"""
from typing import Iterable, Optional


class BenchError(Exception):
    """Base class for all stenobench errors"""
    exit_code = 3


class UsageError(BenchError):
    exit_code = 1


class DataError(BenchError, ValueError):
    exit_code = 2


class DimensionTooSmallError(DataError):
    pass


class TooWideError(DataError):
    def __init__(self, width: int, limit: int):
        self.width = width
        self.limit = limit
        super().__init__(f"Line is {width} px wide after height normalisation, limit is {limit} px")


class ImageNotFoundError(DataError, FileNotFoundError):
    pass


class UnsupportedFormatError(DataError):
    pass


class InvalidParameterError(DataError):
    pass


class UnknownPresetError(DataError):
    pass


class UnknownSymbolError(DataError):
    def __init__(self, symbol: str, position: int, record: Optional[int] = None):
        self.symbol = symbol
        self.position = position
        self.record = record
        where = f" in record {record}" if record is not None else ""
        super().__init__(f"Unknown symbol {symbol!r} at position {position}{where}")


class TargetTooLongError(DataError):
    pass


class ManifestParseError(DataError):
    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class MatrixFormatError(DataError):
    pass


class DimensionMismatchError(DataError):
    pass


class UndefinedRateError(DataError):
    pass


class EmptySelectionError(DataError):
    pass


class DegenerateSampleError(DataError):
    pass


class PairingError(DataError):
    def __init__(self, unmatched: Iterable):
        self.unmatched = sorted(unmatched)
        preview = ", ".join(str(k) for k in self.unmatched[:10])
        more = f" (+{len(self.unmatched) - 10} more)" if len(self.unmatched) > 10 else ""
        super().__init__(f"Unmatched pairing keys: {preview}{more}")


class MissingBaselineError(DataError):
    pass


class MissingPredictionError(DataError):
    def __init__(self, record_ids: Iterable[str]):
        self.record_ids = sorted(record_ids)
        super().__init__(f"No prediction for {len(self.record_ids)} record(s): {', '.join(self.record_ids[:10])}")
