"""Glue between raw datasets and the numeric training path."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, SplitSpec, split
from .metrics import EvalReport, evaluate
from .preprocess import EncodingMaps, TextFeatureMode, digitize_all, fit_encoding_maps
from .refine import RefineConfig, RefinementModel, train_refinement


@dataclass
class PreparedSplit:
    maps: EncodingMaps
    mode: TextFeatureMode
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray


def prepare_split(data: Dataset, spec: SplitSpec,
                  mode: TextFeatureMode = TextFeatureMode.TEXT_LENGTH) -> PreparedSplit:
    """Split, fit encoding maps on the training part only, digitize both parts."""
    mode = TextFeatureMode(mode)
    train, test = split(data, spec)
    maps = fit_encoding_maps(train.records)
    return PreparedSplit(maps, mode,
                         digitize_all(train.records, maps, mode), train.labels,
                         digitize_all(test.records, maps, mode), test.labels)


def run_experiment(data: Dataset, spec: SplitSpec, config: RefineConfig,
                   mode: TextFeatureMode = TextFeatureMode.TEXT_LENGTH,
                   n_jobs: int = 1) -> tuple[RefinementModel, PreparedSplit, EvalReport]:
    prep = prepare_split(data, spec, mode)
    model = train_refinement(prep.X_train, prep.y_train, config, n_jobs=n_jobs)
    return model, prep, evaluate(prep.y_test, model.predict(prep.X_test))
