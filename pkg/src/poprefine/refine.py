"""Iterative residual refinement around a random-forest base regressor.

Training::

    P_0 = base(X)
    for i in 1..k:
        R_i = y - P_{i-1}
        z_i = +1 where |R_i| is large (relative to t_y * max|R_i|), else -1
        g_i = AdaBoost gate fit on (X, z_i)        (skipped when t_y == 0)
        h_i = forest fit on {j : z_i[j] = +1} with targets R_i[j]
        P_i = P_{i-1} + h_i(X) on the selected samples

At prediction time each stage adds ``h_i(x)`` only when its gate says +1.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ._seed import derive_seed
from .boost import BoostClassifier, fit_boost
from .errors import DegenerateStage, EmptyData, EmptyInput, ShapeMismatch
from .forest import Forest, TreeParams, fit_forest


@dataclass(frozen=True)
class ForestConfig:
    params: TreeParams = field(default_factory=TreeParams)
    tree_count: int = 100
    bootstrap: bool = True


@dataclass(frozen=True)
class RefineConfig:
    k: int = 4
    t_y: float = 0.0
    base: ForestConfig = field(default_factory=ForestConfig)
    compensator: ForestConfig = field(default_factory=ForestConfig)
    boost_rounds: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if not 0.0 <= self.t_y <= 1.0:
            raise ValueError("t_y must lie in [0, 1]")
        if self.boost_rounds < 1:
            raise ValueError("boost_rounds must be >= 1")

    @classmethod
    def preset(cls, name: str, **overrides) -> "RefineConfig":
        """Named settings from the parameter study.

        ``effective``: k=4, t_y=0. ``efficient``: k=1, t_y=0.25.
        ``threshold-best``: k=2, t_y=0.03. ``quick``: k=2, t_y=0.
        """
        table = {
            "effective": dict(k=4, t_y=0.0),
            "efficient": dict(k=1, t_y=0.25),
            "threshold-best": dict(k=2, t_y=0.03),
            "quick": dict(k=2, t_y=0.0),
        }
        if name not in table:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(table)}")
        return cls(**{**table[name], **overrides})


@dataclass(frozen=True)
class ResidualLabels:
    residuals: np.ndarray
    threshold: float
    labels: np.ndarray

    @property
    def extreme_count(self) -> int:
        return int(np.count_nonzero(self.labels > 0))


@dataclass
class Stage:
    gate: Optional[BoostClassifier]
    compensator: Optional[Forest]  # None for an identity stage

    def predict(self, X) -> np.ndarray:
        """Additive correction this stage applies to each row of ``X``."""
        X = np.atleast_2d(X)
        if self.compensator is None:
            return np.zeros(X.shape[0])
        delta = self.compensator.predict(X)
        if self.gate is not None:
            delta = np.where(self.gate.predict(X) > 0, delta, 0.0)
        return delta


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    train_mse: float
    threshold: float
    extreme_count: int


@dataclass
class RefinementModel:
    base: Forest
    stages: list
    config: RefineConfig
    training_trace: list = field(default_factory=list)

    def predict(self, X, stages: Optional[int] = None) -> np.ndarray:
        """Refined predictions; ``stages`` truncates the chain (None = all)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        p = self.base.predict(X)
        for stage in self.stages[:stages]:
            p = p + stage.predict(X)
        return p


def compute_residuals(y, p) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if y.shape != p.shape:
        raise ShapeMismatch(f"labels {y.shape} vs predictions {p.shape}")
    return y - p


def threshold_labels(R, t_y: float) -> ResidualLabels:
    """Split residuals into large (+1) and regular (-1) by ``|R| > t_y * max|R|``.

    At ``t_y == 0`` every sample is +1, zero residuals included. When the
    strict test selects nothing (``t_y == 1``) the largest residuals are
    selected instead, unless every residual is zero.
    """
    R = np.asarray(R, dtype=np.float64).ravel()
    if R.size == 0:
        raise EmptyInput("no residuals to threshold")
    if not 0.0 <= t_y <= 1.0:
        raise ValueError("t_y must lie in [0, 1]")
    mag = np.abs(R)
    peak = float(mag.max())
    tau = t_y * peak
    if t_y == 0.0:
        z = np.ones(R.size, dtype=np.int64)
    else:
        z = np.where(mag > tau, 1, -1)
        if not np.any(z > 0) and peak > 0.0:
            z = np.where(mag == peak, 1, -1)
    return ResidualLabels(residuals=R, threshold=tau, labels=z)


def _mse(a, b) -> float:
    d = np.asarray(a) - np.asarray(b)
    return float(np.mean(d * d))


def train_refinement(X, y, config: RefineConfig = RefineConfig(),
                     n_jobs: int = 1) -> RefinementModel:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    if X.shape[0] == 0:
        raise EmptyData("no training samples")
    if X.shape[0] != y.shape[0]:
        raise ShapeMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if X.shape[0] < 2:
        raise EmptyData("refinement needs at least two training samples")

    bc = config.base
    base = fit_forest(X, y, bc.params, bc.tree_count, derive_seed(config.seed, 0),
                      bc.bootstrap, n_jobs=n_jobs)
    p = base.predict(X)
    trace = [TraceEntry(0, _mse(p, y), 0.0, 0)]
    stages = []
    cc = config.compensator
    for i in range(1, config.k + 1):
        lab = threshold_labels(compute_residuals(y, p), config.t_y)
        chosen = lab.labels > 0
        if not chosen.any():
            warnings.warn(f"stage {i}: no samples above threshold; identity stage",
                          DegenerateStage, stacklevel=2)
            stages.append(Stage(gate=None, compensator=None))
            trace.append(TraceEntry(i, _mse(p, y), lab.threshold, 0))
            continue
        gate = None
        if config.t_y > 0.0:
            gate = fit_boost(X, lab.labels, config.boost_rounds,
                             seed=derive_seed(config.seed, 2 * i + 1))
        comp = fit_forest(X[chosen], lab.residuals[chosen], cc.params, cc.tree_count,
                          derive_seed(config.seed, 2 * i), cc.bootstrap, n_jobs=n_jobs)
        # train-time update follows the true labels, not the gate
        p = p.copy()
        p[chosen] += comp.predict(X[chosen])
        stages.append(Stage(gate=gate, compensator=comp))
        trace.append(TraceEntry(i, _mse(p, y), lab.threshold, lab.extreme_count))
    return RefinementModel(base=base, stages=stages, config=config,
                           training_trace=trace)


def refine_predict(model: RefinementModel, x) -> float:
    return float(model.predict(x)[0])


def with_k(config: RefineConfig, k: int) -> RefineConfig:
    return replace(config, k=k)


def with_ty(config: RefineConfig, t_y: float) -> RefineConfig:
    return replace(config, t_y=t_y)
