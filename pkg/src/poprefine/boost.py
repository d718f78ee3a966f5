"""Discrete AdaBoost over decision stumps.

Used as the per-stage gate that decides whether a sample's residual is
large enough to be compensated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import EmptyData, InvalidWeights, ShapeMismatch

EPS_CLAMP = 1e-10


@dataclass(frozen=True)
class Stump:
    """Predicts ``polarity`` when ``x[feature] > threshold``, else ``-polarity``."""

    feature: int
    threshold: float
    polarity: int

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.where(X[:, self.feature] > self.threshold,
                        self.polarity, -self.polarity).astype(np.float64)


@dataclass
class BoostClassifier:
    stumps: list = field(default_factory=list)
    alphas: list = field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.stumps)

    def margin(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        total = np.zeros(X.shape[0])
        for stump, alpha in zip(self.stumps, self.alphas):
            total += alpha * stump.predict(X)
        return total

    def predict(self, X) -> np.ndarray:
        # zero margin goes to +1: an extra compensation is the cheaper mistake
        return np.where(self.margin(X) >= 0.0, 1, -1)


def _check_labels(X, z, w=None):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    z = np.asarray(z).ravel()
    if X.shape[0] == 0:
        raise EmptyData("no training samples")
    if z.shape[0] != X.shape[0]:
        raise ShapeMismatch(f"X has {X.shape[0]} rows but z has {z.shape[0]}")
    if not np.all(np.isin(z, (-1, 1))):
        raise ValueError("labels must be -1 or +1")
    z = z.astype(np.float64)
    if w is not None:
        w = np.asarray(w, dtype=np.float64).ravel()
        if w.shape[0] != X.shape[0]:
            raise ShapeMismatch(f"X has {X.shape[0]} rows but w has {w.shape[0]}")
        if np.any(w < 0) or not np.isfinite(w).all() or w.sum() <= 0:
            raise InvalidWeights("weights must be non-negative with a positive sum")
    return X, z, w


def _presort(X):
    order = np.argsort(X, axis=0, kind="stable")
    return order, np.take_along_axis(X, order, axis=0)


def _best_stump(order, xs, z, w, X):
    n, n_feat = xs.shape
    pos = np.where(z > 0, w, 0.0)
    neg = w - pos
    tot_pos = pos.sum()
    tot_neg = neg.sum()
    best = None
    for f in range(n_feat):
        o = order[:, f]
        col = xs[:, f]
        lpos = np.cumsum(pos[o])[:-1]
        lneg = np.cumsum(neg[o])[:-1]
        valid = col[:-1] < col[1:]
        # candidate 0 puts every sample on the right
        err_plus = np.concatenate(([tot_neg], (lpos + tot_neg - lneg)[valid]))
        err_minus = np.concatenate(([tot_pos], (lneg + tot_pos - lpos)[valid]))
        mids = 0.5 * (col[:-1] + col[1:])
        mids = np.where(mids >= col[1:], col[:-1], mids)
        thresholds = np.concatenate(([-np.inf], mids[valid]))
        errs = np.stack([err_plus, err_minus], axis=1)
        j = int(np.argmin(errs))
        e = float(errs.flat[j])
        if best is None or e < best[0]:
            row, col_ = divmod(j, 2)
            best = (e, Stump(f, float(thresholds[row]), 1 if col_ == 0 else -1))
    # cumulative sums pick the stump; report its error without their round-off
    stump = best[1]
    err = float(w[stump.predict(X) != z].sum()) / (tot_pos + tot_neg)
    return stump, min(max(err, 0.0), 1.0)


def fit_stump(X, z, w) -> tuple[Stump, float]:
    """Stump with the lowest weighted 0-1 error over all features and midpoints.

    Ties go to the lowest feature index, then the lowest threshold, then
    polarity +1.
    """
    X, z, w = _check_labels(X, z, w)
    if abs(w.sum() - 1.0) > 1e-9:
        raise InvalidWeights(f"weights must sum to 1, got {w.sum()!r}")
    order, xs = _presort(X)
    return _best_stump(order, xs, z, w, X)


def boost_iter(X, z, rounds: int) -> Iterator[tuple[Stump, float, np.ndarray]]:
    """Yield ``(stump, alpha, weights_after_update)`` for each AdaBoost round."""
    X, z, _ = _check_labels(X, z)
    n = X.shape[0]
    w = np.full(n, 1.0 / n)
    order, xs = _presort(X)
    for _ in range(rounds):
        stump, err = _best_stump(order, xs, z, w, X)
        eps = min(max(err, EPS_CLAMP), 1.0 - EPS_CLAMP)
        alpha = 0.5 * math.log((1.0 - eps) / eps)
        w = w * np.exp(-alpha * z * stump.predict(X))
        w /= w.sum()
        yield stump, alpha, w
        if err <= EPS_CLAMP or alpha <= 0.0:
            break


def fit_boost(X, z, rounds: int = 50, seed: int = 0) -> BoostClassifier:
    """Discrete AdaBoost with stumps.

    Single-class input short-circuits to a constant classifier. ``seed`` is
    accepted for interface symmetry with the forests; the exhaustive stump
    search has no random component.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    X, z, _ = _check_labels(X, z)
    if np.all(z == z[0]):
        return BoostClassifier([Stump(0, -math.inf, int(z[0]))], [1.0])
    model = BoostClassifier()
    for stump, alpha, _w in boost_iter(X, z, rounds):
        model.stumps.append(stump)
        model.alphas.append(alpha)
    return model


def predict_boost(model: BoostClassifier, x) -> tuple[int, float]:
    m = float(model.margin(x)[0])
    return (1 if m >= 0.0 else -1), m
