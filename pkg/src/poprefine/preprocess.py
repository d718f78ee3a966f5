"""Digitization of post metadata into fixed-length numeric vectors.

Each post carries 15 heterogeneous fields (ids, categorical descriptors,
free text, a timestamp and geo fields). Categorical fields get dense
first-occurrence ids, text fields collapse to a length or word count, and
numeric fields pass through with absent values imputed as 0.0.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import EmptyCorpus

FEATURE_NAMES = (
    "uid", "pid", "cat_id", "subcat_id", "concept_id", "alias_len",
    "is_public", "status_len", "title_feat", "type_len", "tags_feat",
    "date", "lat", "acc", "lon",
)
N_FEATURES = len(FEATURE_NAMES)

CATEGORICAL_FIELDS = ("category", "subcategory", "concept")


class TextFeatureMode(str, enum.Enum):
    WORD_COUNT = "wordcount"
    TEXT_LENGTH = "textlen"


@dataclass(frozen=True)
class RawRecord:
    """One post. Numeric fields are ``None`` when absent or malformed."""

    uid: Optional[int] = None
    pid: Optional[int] = None
    category: str = ""
    subcategory: str = ""
    concept: str = ""
    path_alias: str = ""
    is_public: bool = False
    media_status: str = ""
    title: str = ""
    media_type: str = ""
    all_tags: str = ""
    post_date: Optional[int] = None
    latitude: Optional[float] = None
    geo_accuracy: Optional[float] = None
    longitude: Optional[float] = None
    label: Optional[float] = None

    def __post_init__(self):
        if self.post_date is not None and self.post_date < 0:
            raise ValueError(f"post_date must be non-negative, got {self.post_date}")


def unique_id_convert(values: Iterable[str]) -> list[int]:
    """Map each value to the index of its first occurrence among distinct values.

    >>> unique_id_convert(["a", "b", "a", "c"])
    [0, 1, 0, 2]
    """
    ids: dict = {}
    out = []
    for v in values:
        i = ids.get(v)
        if i is None:
            i = ids[v] = len(ids)
        out.append(i)
    return out


def unique_id_convert_oracle(values: Sequence[str]) -> list[int]:
    """Quadratic remove-duplicates-then-number procedure.

    Slow on purpose; kept as an independent check of :func:`unique_id_convert`.
    """
    copy = list(values)
    i = 0
    while i < len(copy):
        item = copy[i]
        j = 0
        while j < len(copy):
            if j != i and copy[j] == item:
                del copy[j]
                continue
            j += 1
        i += 1
    out = []
    for x in values:
        for j, u in enumerate(copy):
            if x == u:
                out.append(j)
                break
    return out


@dataclass(frozen=True)
class EncodingMaps:
    category: Mapping[str, int] = field(default_factory=dict)
    subcategory: Mapping[str, int] = field(default_factory=dict)
    concept: Mapping[str, int] = field(default_factory=dict)

    def counts(self) -> dict[str, int]:
        return {name: len(getattr(self, name)) for name in CATEGORICAL_FIELDS}

    def encode(self, name: str, value: str) -> int:
        # unseen values get the sentinel id one past the largest fitted id
        table = getattr(self, name)
        return table.get(value, len(table))

    def to_dict(self) -> dict[str, list[str]]:
        """Values in id order, which is enough to rebuild the maps."""
        return {name: sorted(getattr(self, name), key=getattr(self, name).get)
                for name in CATEGORICAL_FIELDS}

    @classmethod
    def from_dict(cls, d: Mapping[str, Sequence[str]]) -> "EncodingMaps":
        return cls(**{name: {v: i for i, v in enumerate(d[name])}
                      for name in CATEGORICAL_FIELDS})


def fit_encoding_maps(records: Sequence[RawRecord]) -> EncodingMaps:
    if len(records) == 0:
        raise EmptyCorpus("cannot fit encoding maps on zero records")
    maps = {}
    for name in CATEGORICAL_FIELDS:
        values = [getattr(r, name) for r in records]
        ids = unique_id_convert(values)
        table: dict[str, int] = {}
        for v, i in zip(values, ids):
            table.setdefault(v, i)
        maps[name] = table
    return EncodingMaps(**maps)


def _text_feature(text: str, mode: TextFeatureMode) -> float:
    if mode is TextFeatureMode.WORD_COUNT:
        return float(len(text.split()))
    return float(len(text))


def _num(x) -> float:
    if x is None:
        return 0.0
    x = float(x)
    return x if math.isfinite(x) else 0.0


def digitize(record: RawRecord, maps: EncodingMaps,
             mode: TextFeatureMode = TextFeatureMode.TEXT_LENGTH) -> np.ndarray:
    mode = TextFeatureMode(mode)
    return np.array([
        _num(record.uid),
        _num(record.pid),
        float(maps.encode("category", record.category)),
        float(maps.encode("subcategory", record.subcategory)),
        float(maps.encode("concept", record.concept)),
        float(len(record.path_alias)),
        1.0 if record.is_public else 0.0,
        float(len(record.media_status)),
        _text_feature(record.title, mode),
        float(len(record.media_type)),
        _text_feature(record.all_tags, mode),
        _num(record.post_date),
        _num(record.latitude),
        _num(record.geo_accuracy),
        _num(record.longitude),
    ], dtype=np.float64)


def digitize_all(records: Sequence[RawRecord], maps: EncodingMaps,
                 mode: TextFeatureMode = TextFeatureMode.TEXT_LENGTH) -> np.ndarray:
    X = np.zeros((len(records), N_FEATURES), dtype=np.float64)
    for i, r in enumerate(records):
        X[i] = digitize(r, maps, mode)
    return X
