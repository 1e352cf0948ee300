"""Input validation helpers for the estimator layer."""

from __future__ import annotations

import numpy as np


def check_matrix(X, allow_nan: bool = False) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError("expected a non-empty 2-D array of samples")
    if not allow_nan and not np.isfinite(X).all():
        raise ValueError("input contains NaN or infinity")
    return X


def check_X_y(X, y, allow_nan: bool = False):
    X = check_matrix(X, allow_nan=allow_nan)
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError("y must be 1-D with one entry per sample")
    return X, y


def encode_binary_labels(y):
    """Map the two distinct values of y onto {0, 1} by sorted order."""
    classes = np.unique(y)
    if classes.shape[0] != 2:
        raise ValueError(f"expected exactly 2 classes, found {classes.shape[0]}")
    return classes, np.searchsorted(classes, y).astype(np.int64)
