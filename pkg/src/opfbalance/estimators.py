"""scikit-learn style estimators wrapping the core operations.

These are the intended public entry points for array-in / array-out use:
``OpfClassifier`` (fit/predict), ``OpfClustering`` (fit/fit_predict), and
the resamplers (``fit_resample`` returning ``(X_res, y_res)``).  They
validate inputs, carry ``get_params``/``set_params`` via ``BaseEstimator``,
and delegate to the functional API which operates on :class:`Dataset`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, ClusterMixin

from ._validation import check_matrix, check_X_y, encode_binary_labels
from .dataset import Dataset, split_validation
from .distance import as_distance
from .hybrid import HybridPolicy, hybrid_resample
from .oversampling import OverPolicy, oversample
from .evaluation import smote_baseline
from .rng import Rng
from .undersampling import undersample
from . import clustering, supervised


def _as_dataset(X, y01):
    return Dataset(X, y01, np.arange(X.shape[0], dtype=np.int64))


class OpfClassifier(ClassifierMixin, BaseEstimator):
    """Optimum-path forest classifier (complete graph, minimax path costs).

    Parameterless apart from the metric; binary problems only.
    """

    def __init__(self, metric="euclidean"):
        self.metric = metric

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, y01 = encode_binary_labels(y)
        d = as_distance(self.metric)
        self.model_ = supervised.fit(_as_dataset(X, y01), d)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        X = check_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        labels, _ = supervised.predict(self.model_, X, as_distance(self.metric))
        return self.classes_[labels]


class OpfClustering(ClusterMixin, BaseEstimator):
    """Density-peak clustering on a k-NN graph with best-k search."""

    def __init__(self, k_max=5, metric="euclidean"):
        self.k_max = k_max
        self.metric = metric

    def fit(self, X, y=None):
        X = check_matrix(X)
        ds = Dataset(X, np.zeros(X.shape[0], dtype=np.int64), np.arange(X.shape[0], dtype=np.int64))
        self.k_star_, self.forest_ = clustering.best_k(ds, self.k_max, as_distance(self.metric))
        self.labels_ = np.asarray(self.forest_.cluster_label)
        self.n_clusters_ = self.forest_.n_clusters
        self.n_features_in_ = X.shape[1]
        return self


class _ResamplerBase(BaseEstimator):
    def _encode(self, X, y):
        X, y = check_X_y(X, y)
        classes, y01 = encode_binary_labels(y)
        return X, y, classes, y01

    def _decode(self, ds, classes):
        return np.array(ds.features), classes[ds.labels]


class O2pfOversampler(_ResamplerBase):
    """Cluster-based minority oversampling (variants: standard/ri/mi/p/wi).

    ``n_synthetic=None`` closes the class gap exactly.
    """

    def __init__(self, k_max=5, variant="standard", n_synthetic=None, random_state=0,
                 metric="euclidean"):
        self.k_max = k_max
        self.variant = variant
        self.n_synthetic = n_synthetic
        self.random_state = random_state
        self.metric = metric

    def fit_resample(self, X, y):
        X, y, classes, y01 = self._encode(X, y)
        ds = _as_dataset(X, y01)
        c0, c1 = ds.class_counts()
        n_s = abs(c0 - c1) if self.n_synthetic is None else int(self.n_synthetic)
        if n_s == 0:
            return X.copy(), y.copy()
        out = oversample(ds, n_s, OverPolicy(self.variant, self.k_max),
                         Rng(self.random_state), as_distance(self.metric))
        return self._decode(out, classes)


class OpfUndersampler(_ResamplerBase):
    """Score-based pruning; carves an internal stratified validation slice.

    The returned arrays cover the resampled remainder only (the validation
    slice is consumed by the scoring pass).
    """

    def __init__(self, policy="us", val_fraction=0.15, random_state=0, metric="euclidean"):
        self.policy = policy
        self.val_fraction = val_fraction
        self.random_state = random_state
        self.metric = metric

    def fit_resample(self, X, y):
        X, y, classes, y01 = self._encode(X, y)
        rest, val = split_validation(_as_dataset(X, y01), self.val_fraction, Rng(self.random_state))
        out = undersample(rest, val, self.policy, as_distance(self.metric))
        return self._decode(out, classes)


class OpfHybridResampler(_ResamplerBase):
    """Score-based pruning followed by cluster-based balancing."""

    def __init__(self, under="us1", k_max=5, val_fraction=0.15, random_state=0,
                 metric="euclidean"):
        self.under = under
        self.k_max = k_max
        self.val_fraction = val_fraction
        self.random_state = random_state
        self.metric = metric

    def fit_resample(self, X, y):
        X, y, classes, y01 = self._encode(X, y)
        rng = Rng(self.random_state)
        rest, val = split_validation(_as_dataset(X, y01), self.val_fraction, rng.child(1))
        policy = HybridPolicy(self.under, OverPolicy("standard", self.k_max))
        out = hybrid_resample(rest, val, policy, rng.child(2), as_distance(self.metric))
        return self._decode(out, classes)


class SmoteOversampler(_ResamplerBase):
    """Minimal nearest-neighbor interpolation baseline."""

    def __init__(self, k=5, n_synthetic=None, random_state=0, metric="euclidean"):
        self.k = k
        self.n_synthetic = n_synthetic
        self.random_state = random_state
        self.metric = metric

    def fit_resample(self, X, y):
        X, y, classes, y01 = self._encode(X, y)
        ds = _as_dataset(X, y01)
        c0, c1 = ds.class_counts()
        n_s = abs(c0 - c1) if self.n_synthetic is None else int(self.n_synthetic)
        if n_s == 0:
            return X.copy(), y.copy()
        out = smote_baseline(ds, n_s, self.k, Rng(self.random_state), as_distance(self.metric))
        return self._decode(out, classes)
