"""Rank correlation, MSE and MAE."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, ShapeMismatch, TooFewSamples


def average_ranks(v) -> np.ndarray:
    """1-based ranks; tied values share the mean of the positions they occupy.

    >>> average_ranks([7, 3, 7, 1]).tolist()
    [3.5, 2.0, 3.5, 1.0]
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptyInput("cannot rank an empty vector")
    order = np.argsort(v, kind="stable")
    sv = v[order]
    ranks = np.empty(v.size, dtype=np.float64)
    # group boundaries of equal values in sorted order
    starts = np.flatnonzero(np.concatenate(([True], sv[1:] != sv[:-1])))
    ends = np.concatenate((starts[1:], [v.size]))
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = 0.5 * (s + 1 + e)
    return ranks


def _pair(a, b, min_len: int):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeMismatch(f"length {a.size} vs {b.size}")
    if a.size < min_len:
        if min_len <= 1:
            raise EmptyInput("need at least one pair")
        raise TooFewSamples(f"need at least {min_len} pairs, got {a.size}")
    return a, b


def _spearman(a, b) -> tuple[float, bool]:
    a, b = _pair(a, b, 2)
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValueError("spearman_rho needs finite inputs")
    ra = average_ranks(a)
    rb = average_ranks(b)
    ca = ra - ra.mean()
    cb = rb - rb.mean()
    ssa = float(ca @ ca)
    ssb = float(cb @ cb)
    if ssa == 0.0 or ssb == 0.0:
        return 0.0, True
    if np.array_equal(ca, cb):
        return 1.0, False
    if np.array_equal(ca, -cb):
        return -1.0, False
    r = float(ca @ cb) / math.sqrt(ssa * ssb)
    return min(1.0, max(-1.0, r)), False


def spearman_rho(a, b) -> float:
    """Pearson correlation of average ranks. A constant input gives 0.0."""
    return _spearman(a, b)[0]


def mse(a, b) -> float:
    a, b = _pair(a, b, 1)
    d = a - b
    return float(np.mean(d * d))


def mae(a, b) -> float:
    a, b = _pair(a, b, 1)
    return float(np.mean(np.abs(a - b)))


@dataclass(frozen=True)
class EvalReport:
    spearman_rho: float
    mse: float
    mae: float
    n: int
    rho_undefined: bool = False

    def as_row(self) -> dict:
        return {"rho": self.spearman_rho, "mse": self.mse, "mae": self.mae, "n": self.n}


def evaluate(y_true, y_pred) -> EvalReport:
    rho, undefined = _spearman(y_true, y_pred)
    return EvalReport(rho, mse(y_true, y_pred), mae(y_true, y_pred),
                      int(np.size(y_true)), undefined)


def format_reports(rows: dict) -> str:
    """Fixed-width table, one line per named report."""
    width = max([len("model")] + [len(k) for k in rows])
    lines = [f"{'model':<{width}}  {'rho':>9}  {'mse':>12}  {'mae':>12}  {'n':>8}"]
    for name, r in rows.items():
        flag = " (rho undefined: constant input)" if r.rho_undefined else ""
        lines.append(f"{name:<{width}}  {r.spearman_rho:9.4f}  {r.mse:12.6f}  "
                     f"{r.mae:12.6f}  {r.n:8d}{flag}")
    return "\n".join(lines)
