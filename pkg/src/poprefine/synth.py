"""Synthetic post corpus with heavy-tailed popularity scores.

Scores are an affine function of the digitized features plus Gaussian
noise. A set of "headline" users, covering about ``tail_frac`` of all
posts, has every score multiplied by a per-user log-normal factor, so the
extremes are predictable from metadata (the uid) but sit far outside the
bulk of the distribution.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ._seed import make_rng
from .dataset import Dataset
from .preprocess import (FEATURE_NAMES, RawRecord, TextFeatureMode, digitize_all,
                         fit_encoding_maps)

_CATEGORIES = (
    "Fashion", "Travel", "Food", "Animal", "Holiday&Celebrations", "Entertainment",
    "Social&People", "Sports", "Urban", "Whether&Season", "Family",
)
_WORDS = (
    "sunset", "beach", "city", "night", "street", "portrait", "cat", "dog", "food",
    "coffee", "tokyo", "paris", "snow", "summer", "festival", "concert", "bride",
    "mountain", "river", "flower", "macro", "bokeh", "canon", "nikon", "travel",
    "夕焼け", "東京", "猫", "海", "café", "playa", "ciudad", "noche", "perro", "fiesta",
    "красота", "город", "Straße", "Sonne", "山", "花", "빛", "바다", "love", "art",
)
_CONCEPTS = tuple(f"concept_{w}" for w in _WORDS[:30])

DEFAULT_COEFFICIENTS = {
    "cat_id": 0.15,
    "subcat_id": 0.02,
    "concept_id": 0.01,
    "alias_len": 0.01,
    "is_public": 0.8,
    "title_feat": 0.03,
    "tags_feat": 0.004,
    "acc": 0.05,
}


def _coef_vector(named: dict) -> tuple:
    unknown = set(named) - set(FEATURE_NAMES)
    if unknown:
        raise ValueError(f"unknown features {sorted(unknown)}")
    return tuple(float(named.get(name, 0.0)) for name in FEATURE_NAMES)


@dataclass(frozen=True)
class SynthConfig:
    n: int = 5000
    seed: int = 0
    coefficients: tuple = field(default_factory=lambda: _coef_vector(DEFAULT_COEFFICIENTS))
    intercept: float = 1.0
    noise: float = 0.3
    tail_frac: float = 0.05
    tail_mu: float = 1.5
    tail_sigma: float = 1.0
    users_per_post: float = 1 / 25

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        if not 0.0 <= self.tail_frac <= 1.0:
            raise ValueError("tail_frac must lie in [0, 1]")
        if len(self.coefficients) != len(FEATURE_NAMES):
            raise ValueError(f"need {len(FEATURE_NAMES)} coefficients")

    def with_coefficients(self, named: dict) -> "SynthConfig":
        return replace(self, coefficients=_coef_vector(named))


def _words(rng, lo, hi) -> str:
    k = int(rng.integers(lo, hi + 1))
    return " ".join(_WORDS[i] for i in rng.integers(0, len(_WORDS), k))


def generate_synthetic(config: SynthConfig = SynthConfig()) -> Dataset:
    rng = make_rng(config.seed, 0)
    n = config.n
    n_users = max(2, int(round(n * config.users_per_post)))
    uids = rng.integers(1, n_users + 1, n)
    pids = rng.choice(10 * n, size=n, replace=False) + 100_000
    dates = 1_420_070_400 + np.cumsum(rng.exponential(600.0, n)).astype(np.int64)

    records = []
    for i in range(n):
        cat = int(rng.integers(0, len(_CATEGORIES)))
        has_geo = rng.random() < 0.4
        records.append(RawRecord(
            uid=int(uids[i]),
            pid=int(pids[i]),
            category=_CATEGORIES[cat],
            subcategory=f"{_CATEGORIES[cat]}/{int(rng.integers(0, 4))}",
            concept=_CONCEPTS[int(rng.integers(0, len(_CONCEPTS)))],
            path_alias="" if rng.random() < 0.5 else
            "u" + "".join(chr(97 + c) for c in rng.integers(0, 26, int(rng.integers(3, 15)))),
            is_public=bool(rng.random() < 0.85),
            media_status="ready",
            title=_words(rng, 0, 12),
            media_type="photo" if rng.random() < 0.9 else "video",
            all_tags=_words(rng, 0, 25),
            post_date=int(dates[i]),
            latitude=float(rng.uniform(-60, 70)) if has_geo else None,
            geo_accuracy=float(rng.integers(1, 17)) if has_geo else 0.0,
            longitude=float(rng.uniform(-180, 180)) if has_geo else None,
        ))

    X = digitize_all(records, fit_encoding_maps(records), TextFeatureMode.TEXT_LENGTH)
    labels = X @ np.asarray(config.coefficients) + config.intercept
    labels = labels + config.noise * rng.standard_normal(n)

    # headline users in random order until their posts cover tail_frac of the corpus
    factor = np.ones(n)
    target = int(round(config.tail_frac * n))
    if target > 0:
        counts = np.bincount(uids, minlength=n_users + 1)
        covered = 0
        for u in rng.permutation(np.arange(1, n_users + 1)):
            if covered >= target:
                break
            if counts[u] == 0:
                continue
            factor[uids == u] = 1.0 + rng.lognormal(config.tail_mu, config.tail_sigma)
            covered += counts[u]
    labels = labels * factor

    out = [replace(r, label=float(v)) for r, v in zip(records, labels)]
    return Dataset(out, f"synthetic(seed={config.seed}, n={n})")
