"""Ridge-regularized linear regression baseline."""
from __future__ import annotations

import numpy as np

from .errors import EmptyData, ShapeMismatch, SingularSystem

DEFAULT_RIDGE = 1e-8


def fit_linear(X, y, ridge: float = DEFAULT_RIDGE) -> np.ndarray:
    """Minimize ``||Xw + b - y||^2 + ridge * ||w||^2`` over slopes ``w`` and intercept ``b``.

    Returns ``[w_0, ..., w_{F-1}, b]``. The intercept is not penalized. The
    normal equations are solved on centered, column-scaled data, which is
    algebraically the same problem but survives features like epoch
    timestamps sitting next to booleans.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    n, n_feat = X.shape
    if n == 0:
        raise EmptyData("no training samples")
    if y.shape[0] != n:
        raise ShapeMismatch(f"X has {n} rows but y has {y.shape[0]}")

    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    scale = np.sqrt((Xc * Xc).sum(axis=0))
    scale[scale == 0] = 1.0
    Z = Xc / scale
    gram = Z.T @ Z + ridge * np.diag(1.0 / scale**2)
    if ridge == 0.0 and np.linalg.matrix_rank(Z) < n_feat:
        raise SingularSystem("design matrix is rank-deficient; use ridge > 0")
    try:
        v = np.linalg.solve(gram, Z.T @ (y - y_mean))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    w = v / scale
    return np.concatenate((w, [y_mean - x_mean @ w]))


def predict_linear(weights, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return X @ weights[:-1] + weights[-1]
