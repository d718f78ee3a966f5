"""CART regression trees and a bagged random-forest regressor.

Trees are grown depth-first by greedy variance reduction. The split search
and routing loops are compiled with numba; everything else is plain numpy.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from ._seed import derive_seed, make_rng
from .errors import EmptyData, ShapeMismatch


@dataclass(frozen=True)
class TreeParams:
    max_depth: Optional[int] = None
    min_samples_leaf: int = 5
    features_per_split: int = 5

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive or None")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.features_per_split < 1:
            raise ValueError("features_per_split must be >= 1")


@njit(cache=True, nogil=True)
def _grow(X, y, sample_idx, feat_keys, max_depth, min_leaf, n_try):
    n = sample_idx.shape[0]
    n_feat = X.shape[1]
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int32)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    value = np.zeros(cap, dtype=np.float64)
    n_node = np.zeros(cap, dtype=np.int64)
    decrease = np.zeros(cap, dtype=np.float64)

    idx = sample_idx.copy()
    buf = np.empty(n, dtype=sample_idx.dtype)
    st_node = np.empty(cap, dtype=np.int64)
    st_lo = np.empty(cap, dtype=np.int64)
    st_hi = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    sp = 0
    st_node[0] = 0
    st_lo[0] = 0
    st_hi[0] = n
    st_depth[0] = 0
    sp = 1
    node_count = 1
    key_row = 0

    while sp > 0:
        sp -= 1
        node = st_node[sp]
        lo = st_lo[sp]
        hi = st_hi[sp]
        depth = st_depth[sp]
        m = hi - lo

        total = 0.0
        ymin = np.inf
        ymax = -np.inf
        for i in range(lo, hi):
            v = y[idx[i]]
            total += v
            if v < ymin:
                ymin = v
            if v > ymax:
                ymax = v
        mean = total / m
        value[node] = mean
        n_node[node] = m

        if max_depth >= 0 and depth >= max_depth:
            continue
        if m < 2 * min_leaf or ymin == ymax:
            continue

        sse = 0.0
        for i in range(lo, hi):
            d = y[idx[i]] - mean
            sse += d * d

        order = np.argsort(feat_keys[key_row])
        key_row += 1

        best_gain = 1e-12 * sse
        best_f = -1
        best_t = 0.0
        xs = np.empty(m, dtype=np.float64)

        pos = 0
        while pos < n_feat:
            # first the drawn subset (ascending index for tie-breaks), then one
            # extra feature at a time until some valid split turns up
            if pos == 0:
                stop = min(n_try, n_feat)
                batch = np.sort(order[:stop])
                pos = stop
            else:
                batch = order[pos:pos + 1]
                pos += 1
            for f in batch:
                for i in range(m):
                    xs[i] = X[idx[lo + i], f]
                o = np.argsort(xs, kind="mergesort")
                csum = 0.0
                for i in range(m - min_leaf):
                    csum += y[idx[lo + o[i]]] - mean
                    n_left = i + 1
                    if n_left < min_leaf:
                        continue
                    a = xs[o[i]]
                    b = xs[o[i + 1]]
                    if a == b:
                        continue
                    gain = csum * csum * m / (n_left * (m - n_left))
                    if gain > best_gain:
                        best_gain = gain
                        best_f = f
                        t = 0.5 * (a + b)
                        if t >= b:
                            t = a
                        best_t = t
            if best_f >= 0:
                break

        if best_f < 0:
            continue

        # stable partition of idx[lo:hi]
        k = lo
        r = 0
        for i in range(lo, hi):
            s = idx[i]
            if X[s, best_f] <= best_t:
                idx[k] = s
                k += 1
            else:
                buf[r] = s
                r += 1
        for i in range(r):
            idx[k + i] = buf[i]

        feature[node] = best_f
        threshold[node] = best_t
        decrease[node] = best_gain
        lnode = node_count
        rnode = node_count + 1
        node_count += 2
        left[node] = lnode
        right[node] = rnode

        st_node[sp] = rnode
        st_lo[sp] = k
        st_hi[sp] = hi
        st_depth[sp] = depth + 1
        sp += 1
        st_node[sp] = lnode
        st_lo[sp] = lo
        st_hi[sp] = k
        st_depth[sp] = depth + 1
        sp += 1

    return (feature[:node_count].copy(), threshold[:node_count].copy(),
            left[:node_count].copy(), right[:node_count].copy(),
            value[:node_count].copy(), n_node[:node_count].copy(),
            decrease[:node_count].copy())


@njit(cache=True, nogil=True)
def _route(feature, threshold, left, right, value, X):
    out = np.empty(X.shape[0], dtype=np.float64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


@dataclass(eq=False)
class RegressionTree:
    """Flat node arrays; ``feature[j] == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    impurity_decrease: np.ndarray

    ARRAYS = ("feature", "threshold", "left", "right", "value",
              "n_samples", "impurity_decrease")

    @property
    def node_count(self) -> int:
        return int(self.feature.shape[0])

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature < 0

    def depth(self) -> int:
        depths = np.zeros(self.node_count, dtype=np.int64)
        for j in range(self.node_count):
            if self.feature[j] >= 0:
                depths[self.left[j]] = depths[self.right[j]] = depths[j] + 1
        return int(depths.max())

    def predict(self, X) -> np.ndarray:
        X = _as_matrix(X)
        return _route(self.feature, self.threshold, self.left, self.right,
                      self.value, X)

    def __eq__(self, other):
        if not isinstance(other, RegressionTree):
            return NotImplemented
        return all(np.array_equal(getattr(self, a), getattr(other, a))
                   for a in self.ARRAYS)


@dataclass(eq=False)
class Forest:
    trees: list
    params: TreeParams = field(default_factory=TreeParams)
    seed: int = 0
    bootstrap: bool = True

    @property
    def tree_count(self) -> int:
        return len(self.trees)

    def predict(self, X) -> np.ndarray:
        X = _as_matrix(X)
        total = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)


def _as_matrix(X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    return X


def _check_xy(X, y):
    X = _as_matrix(X)
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    if X.shape[0] == 0:
        raise EmptyData("no training samples")
    if y.shape[0] != X.shape[0]:
        raise ShapeMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("training data contains non-finite values")
    return X, y


def _fit_on(X, y, sample_idx, params: TreeParams, tree_seed: int) -> RegressionTree:
    rng = make_rng(tree_seed, 0)
    n = sample_idx.shape[0]
    keys = rng.random((max(n, 1), X.shape[1]))
    max_depth = -1 if params.max_depth is None else params.max_depth
    arrays = _grow(X, y, sample_idx, keys, max_depth, params.min_samples_leaf,
                   min(params.features_per_split, X.shape[1]))
    return RegressionTree(*arrays)


def fit_tree(X, y, params: TreeParams = TreeParams(), seed: int = 0) -> RegressionTree:
    X, y = _check_xy(X, y)
    return _fit_on(X, y, np.arange(X.shape[0], dtype=np.int64), params, seed)


def predict_tree(tree: RegressionTree, x) -> float:
    return float(tree.predict(x)[0])


def fit_forest(X, y, params: TreeParams = TreeParams(), tree_count: int = 100,
               seed: int = 0, bootstrap: bool = True, n_jobs: int = 1) -> Forest:
    """Bag ``tree_count`` trees; tree ``t`` uses only ``derive_seed(seed, t)``.

    Because every tree draws from its own stream, the fitted forest does not
    depend on ``n_jobs`` or on scheduling.
    """
    if tree_count < 1:
        raise ValueError("tree_count must be >= 1")
    X, y = _check_xy(X, y)
    n = X.shape[0]

    def one(t):
        tree_seed = derive_seed(seed, t)
        if bootstrap:
            idx = make_rng(tree_seed, 1).integers(0, n, n, dtype=np.int64)
        else:
            idx = np.arange(n, dtype=np.int64)
        return _fit_on(X, y, idx, params, tree_seed)

    if n_jobs > 1 and tree_count > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as ex:
            trees = list(ex.map(one, range(tree_count)))
    else:
        trees = [one(t) for t in range(tree_count)]
    return Forest(trees=trees, params=params, seed=seed, bootstrap=bootstrap)


def predict_forest(forest: Forest, x) -> float:
    return float(forest.predict(x)[0])


def feature_importance(forest: Forest, n_features: Optional[int] = None) -> np.ndarray:
    """Total impurity decrease per feature over all trees, normalized to sum 1."""
    if n_features is None:
        n_features = 15
        for tree in forest.trees:
            if tree.node_count and tree.feature.max() >= n_features:
                n_features = int(tree.feature.max()) + 1
    imp = np.zeros(n_features, dtype=np.float64)
    for tree in forest.trees:
        split = tree.feature >= 0
        np.add.at(imp, tree.feature[split], tree.impurity_decrease[split])
    total = imp.sum()
    return imp / total if total > 0 else imp
