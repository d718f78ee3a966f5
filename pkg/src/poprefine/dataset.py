"""Loading, writing and splitting post datasets (TSV or JSONL)."""
from __future__ import annotations

import csv
import enum
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._seed import make_rng
from .errors import (DataError, EmptyFile, FileNotFound, MissingLabels,
                     SchemaMismatch, TestCountTooLarge)
from .preprocess import RawRecord

# on-disk column name -> RawRecord attribute
COLUMNS = {
    "uid": "uid",
    "pid": "pid",
    "category": "category",
    "subcategory": "subcategory",
    "concept": "concept",
    "pathalias": "path_alias",
    "ispublic": "is_public",
    "mediastatus": "media_status",
    "title": "title",
    "mediatype": "media_type",
    "alltags": "all_tags",
    "postdate": "post_date",
    "latitude": "latitude",
    "geoaccuracy": "geo_accuracy",
    "longitude": "longitude",
}
LABEL_COLUMN = "label"
_INT_FIELDS = {"uid", "pid", "post_date"}
_FLOAT_FIELDS = {"latitude", "geo_accuracy", "longitude"}

TEST_FRACTION = 5614 / 305614


class DataFormat(str, enum.Enum):
    TSV = "tsv"
    JSONL = "jsonl"


@dataclass
class Dataset:
    records: list
    provenance: str = field(default="", compare=False)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def has_labels(self) -> bool:
        return bool(self.records) and all(r.label is not None for r in self.records)

    @property
    def labels(self) -> Optional[np.ndarray]:
        if not self.has_labels:
            return None
        return np.array([r.label for r in self.records], dtype=np.float64)

    def subset(self, indices, provenance: str = "") -> "Dataset":
        return Dataset([self.records[i] for i in indices],
                       provenance or self.provenance)


def _parse_int(raw):
    if isinstance(raw, bool):
        raise ValueError("boolean is not an integer")
    if isinstance(raw, int):
        return raw
    x = float(raw)
    if not x.is_integer():
        raise ValueError(f"{raw!r} is not an integer")
    return int(x)


def _parse_float(raw):
    if isinstance(raw, bool):
        raise ValueError("boolean is not a number")
    x = float(raw)
    if not math.isfinite(x):
        raise ValueError(f"{raw!r} is not finite")
    return x


def _parse_bool(raw):
    if isinstance(raw, bool):
        return raw
    if isinstance(raw, (int, float)) and raw in (0, 1):
        return bool(raw)
    s = str(raw).strip().lower()
    if s in ("1", "true", "t", "yes", "y"):
        return True
    if s in ("0", "false", "f", "no", "n"):
        return False
    raise ValueError(f"{raw!r} is not a boolean")


def _blank(raw) -> bool:
    return raw is None or (isinstance(raw, str) and raw.strip() == "")


def _record_from_row(row: dict, warnings: Counter, where: str) -> RawRecord:
    kw = {}
    for col, attr in COLUMNS.items():
        raw = row.get(col)
        if attr in _INT_FIELDS or attr in _FLOAT_FIELDS:
            if _blank(raw):
                kw[attr] = None
                continue
            try:
                val = _parse_int(raw) if attr in _INT_FIELDS else _parse_float(raw)
                if attr == "post_date" and val < 0:
                    raise ValueError("negative timestamp")
                kw[attr] = val
            except (TypeError, ValueError):
                warnings[col] += 1
                kw[attr] = None
        elif attr == "is_public":
            if _blank(raw):
                kw[attr] = False
                continue
            try:
                kw[attr] = _parse_bool(raw)
            except ValueError:
                warnings[col] += 1
                kw[attr] = False
        else:
            kw[attr] = "" if raw is None else str(raw)
    raw = row.get(LABEL_COLUMN)
    if not _blank(raw):
        try:
            kw["label"] = _parse_float(raw)
        except (TypeError, ValueError):
            raise DataError(f"{where}: label {raw!r} is not a finite number") from None
    return RawRecord(**kw)


def read_column_map(path) -> dict:
    """Read ``schema_name = file_column`` lines (``#`` starts a comment)."""
    mapping = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise DataError(f"{path}: expected 'name = column', got {line!r}")
        key = key.strip()
        if key not in COLUMNS and key != LABEL_COLUMN:
            raise DataError(f"{path}: unknown schema column {key!r}")
        mapping[key] = val.strip()
    return mapping


def _rename(row: dict, column_map: Optional[dict]) -> dict:
    if not column_map:
        return row
    inverse = {v: k for k, v in column_map.items()}
    return {inverse.get(k, k): v for k, v in row.items()}


def load_dataset(path, fmt: DataFormat | str = DataFormat.TSV,
                 column_map: Optional[dict] = None) -> tuple[Dataset, Counter]:
    """Parse a dataset file.

    Malformed numeric values load as absent and are counted per column in
    the returned :class:`collections.Counter`.
    """
    path = Path(path)
    fmt = DataFormat(fmt)
    if not path.is_file():
        raise FileNotFound(f"no such data file: {path}")
    warnings: Counter = Counter()
    records = []
    required = set(COLUMNS)
    with open(path, newline="", encoding="utf-8") as fh:
        if fmt is DataFormat.TSV:
            reader = csv.DictReader(fh, delimiter="\t")
            if reader.fieldnames is None:
                raise EmptyFile(f"{path} is empty")
            header = set(_rename(dict.fromkeys(reader.fieldnames), column_map))
            missing = required - header
            if missing:
                raise SchemaMismatch(f"{path}: missing columns {sorted(missing)}")
            for lineno, row in enumerate(reader, start=2):
                records.append(_record_from_row(_rename(row, column_map), warnings,
                                                f"{path}:{lineno}"))
        else:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from None
                if not isinstance(obj, dict):
                    raise DataError(f"{path}:{lineno}: expected a JSON object")
                obj = _rename(obj, column_map)
                missing = required - set(obj)
                if missing:
                    raise SchemaMismatch(f"{path}:{lineno}: missing keys {sorted(missing)}")
                records.append(_record_from_row(obj, warnings, f"{path}:{lineno}"))
    if not records:
        raise EmptyFile(f"{path} has no records")
    return Dataset(records, str(path)), warnings


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_dataset(dataset: Dataset, path, fmt: DataFormat | str = DataFormat.TSV) -> None:
    fmt = DataFormat(fmt)
    with_label = any(r.label is not None for r in dataset.records)
    cols = list(COLUMNS) + ([LABEL_COLUMN] if with_label else [])
    attrs = list(COLUMNS.values()) + (["label"] if with_label else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if fmt is DataFormat.TSV:
            w = csv.writer(fh, delimiter="\t", lineterminator="\n")
            w.writerow(cols)
            for r in dataset.records:
                w.writerow([_cell(getattr(r, a)) for a in attrs])
        else:
            for r in dataset.records:
                obj = {c: getattr(r, a) for c, a in zip(cols, attrs)}
                fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


class SplitMode(str, enum.Enum):
    RANDOM = "random"  # Set-A
    TIME = "time"  # Set-B


@dataclass(frozen=True)
class SplitSpec:
    mode: SplitMode = SplitMode.RANDOM
    test_count: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", SplitMode(self.mode))
        if self.test_count < 1:
            raise ValueError("test_count must be positive")


def default_test_count(n: int) -> int:
    """Test-set size at the 5,614 / 305,614 proportion, at least 1."""
    return max(1, round(n * TEST_FRACTION))


def split_indices(n: int, spec: SplitSpec, post_dates: Sequence = ()) -> tuple:
    if spec.test_count >= n:
        raise TestCountTooLarge(f"test_count {spec.test_count} >= dataset size {n}")
    if spec.mode is SplitMode.RANDOM:
        order = make_rng(spec.seed, 0).permutation(n)
    else:
        # stable: equal timestamps keep input order; absent dates sort first
        order = np.array(sorted(range(n), key=lambda i: -1 if post_dates[i] is None
                                else post_dates[i]), dtype=np.int64)
    cut = n - spec.test_count
    return order[:cut], order[cut:]


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    if not dataset.has_labels:
        raise MissingLabels("splitting requires every record to carry a label")
    dates = [r.post_date for r in dataset.records]
    train_idx, test_idx = split_indices(len(dataset), spec, dates)
    return (dataset.subset(train_idx, f"{dataset.provenance}[train]"),
            dataset.subset(test_idx, f"{dataset.provenance}[test]"))
