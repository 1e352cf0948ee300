"""Score-based undersampling driven by a validation pass.

A supervised forest is trained, every validation sample is classified, and
the training sample that conquered it gets +1 on a correct prediction and -1
otherwise.  Pruning policies then act on the scores:

* ``us``  - remove the (majority_count - minority_count) lowest-scored
            majority samples, leaving the set exactly balanced;
* ``us1`` - remove majority samples with score < 0;
* ``us2`` - remove majority samples with score <= 0;
* ``us3`` - remove samples of either class with score < 0.

Removal order ranks ascending by (score, training cost, id).  A guard keeps
at least one sample per class; when it fires a
:class:`ClassPreservationWarning` is emitted.
"""

from __future__ import annotations

import warnings

import numpy as np

from .dataset import Dataset
from .distance import DistanceFn, as_distance
from . import supervised

UNDER_POLICIES = ("us", "us1", "us2", "us3")


class ClassPreservationWarning(UserWarning):
    """Raised when a pruning policy would have emptied a class."""


def _check_policy(policy: str) -> str:
    policy = str(policy).lower()
    if policy not in UNDER_POLICIES:
        raise ValueError(f"unknown undersampling policy {policy!r}; expected one of {UNDER_POLICIES}")
    return policy


def _score_with_model(model: supervised.TrainedOpf, val: Dataset, d: DistanceFn) -> np.ndarray:
    scores = np.zeros(model.nodes.n, dtype=np.int64)
    _, conquerors = supervised.predict(model, val.features, d)
    pos = model.index_of(conquerors)
    correct = model.out_label[pos] == val.labels
    np.add.at(scores, pos[correct], 1)
    np.add.at(scores, pos[~correct], -1)
    return scores


def score_training(train: Dataset, val: Dataset, d: DistanceFn = None) -> dict:
    """Per-training-sample relevance scores (id -> int) from a validation pass."""
    d = as_distance(d)
    if val.n < 1:
        raise ValueError("validation set must be non-empty")
    model = supervised.fit(train, d)
    scores = _score_with_model(model, val, d)
    return {int(i): int(s) for i, s in zip(model.nodes.ids, scores)}


def _prune(model: supervised.TrainedOpf, scores: np.ndarray, policy: str):
    """Positions to remove from the model's node set under a policy."""
    ds = model.nodes
    labels = ds.labels
    maj = ds.majority_label()
    c0, c1 = ds.class_counts()
    counts = {0: c0, 1: c1}

    # Ascending (score, cost, id); node rows are id-sorted so position is id order.
    order = np.lexsort((np.arange(ds.n), model.cost, scores))

    if policy == "us":
        n_r = counts[maj] - counts[1 - maj]
        maj_order = order[labels[order] == maj]
        removed = maj_order[:n_r]
    elif policy == "us1":
        removed = order[(labels[order] == maj) & (scores[order] < 0)]
    elif policy == "us2":
        removed = order[(labels[order] == maj) & (scores[order] <= 0)]
    else:  # us3
        removed = order[scores[order] < 0]

    keep_back = []
    removed_set = set(removed.tolist())
    for c in (0, 1):
        if counts[c] == 0:
            continue
        class_removed = [p for p in order if labels[p] == c and p in removed_set]
        if len(class_removed) == counts[c]:
            keep_back.append(class_removed[-1])  # top of the ranking for that class
    if keep_back:
        warnings.warn(
            "pruning would have emptied a class; retaining its top-scored sample",
            ClassPreservationWarning,
            stacklevel=3,
        )
        removed_set -= set(keep_back)
        removed = np.array(sorted(removed_set), dtype=np.int64)
    return removed


def undersample(train: Dataset, val: Dataset, policy: str, d: DistanceFn = None) -> Dataset:
    """Prune low-relevance training samples; returns the reduced training set."""
    policy = _check_policy(policy)
    d = as_distance(d)
    c0, c1 = train.class_counts()
    if min(c0, c1) < 2:
        raise ValueError("undersampling requires at least 2 samples per class")
    if val.n < 1:
        raise ValueError("validation set must be non-empty")

    model = supervised.fit(train, d)
    scores = _score_with_model(model, val, d)
    removed = _prune(model, scores, policy)

    keep = np.ones(model.nodes.n, dtype=bool)
    keep[np.asarray(removed, dtype=np.int64)] = False
    return model.nodes.subset(np.flatnonzero(keep))
