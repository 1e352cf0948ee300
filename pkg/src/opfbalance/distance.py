"""Pairwise distance plumbing shared by every graph construction."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist


class DistanceFn:
    """Symmetric, non-negative distance with d(x, x) = 0.

    Subclasses implement :meth:`rows`; :meth:`pair` falls back to a 1x1
    call of it so both entry points share one arithmetic path.
    """

    def rows(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def pair(self, x: np.ndarray, y: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return float(self.rows(x[None, :], y[None, :])[0, 0])


class EuclideanDistance(DistanceFn):
    """Plain Euclidean metric (the package default)."""

    def rows(self, X, Y):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        return cdist(X, Y)

    def __repr__(self):
        return "EuclideanDistance()"


class CallableDistance(DistanceFn):
    """Adapter for a user-supplied ``f(x, y) -> float``; rows run pairwise."""

    def __init__(self, fn):
        self.fn = fn

    def rows(self, X, Y):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        out = np.empty((X.shape[0], Y.shape[0]), dtype=np.float64)
        for i, x in enumerate(X):
            for j, y in enumerate(Y):
                out[i, j] = self.fn(x, y)
        return out

    def pair(self, x, y):
        return float(self.fn(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)))


def as_distance(metric) -> DistanceFn:
    """Resolve ``None`` / ``"euclidean"`` / DistanceFn / callable to a DistanceFn."""
    if metric is None or (isinstance(metric, str) and metric == "euclidean"):
        return EuclideanDistance()
    if isinstance(metric, DistanceFn):
        return metric
    if callable(metric):
        return CallableDistance(metric)
    raise ValueError(f"unsupported metric: {metric!r}")
