"""Supervised optimum-path forest classifier over the complete graph.

Training spreads minimax path costs from prototype samples: the cost offered
along a path is the largest edge distance on it, and every sample is
conquered by the prototype tree that offers the smallest such cost.
Prototypes are elected from the minimum spanning tree: both endpoints of any
MST edge whose endpoints carry different labels.

Tie-breaking is pinned everywhere so runs are bit-reproducible:

* MST construction prefers the lexicographically smaller
  ``(min(id), max(id))`` edge key among equal-weight candidates.
* The training queue pops the smallest id among equal minimum costs, and an
  equal-cost offer never overwrites an earlier conqueror.
* Classification prefers the smaller training cost, then the smaller id,
  among equal offered costs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .distance import DistanceFn, as_distance

# Full pairwise matrices are cached up to this many nodes; beyond it rows are
# recomputed on demand to bound memory.
DISTANCE_CACHE_LIMIT = 4096

_CLASSIFY_CHUNK = 256


class _RowSource:
    """Distance rows against a fixed node set, cached when small enough."""

    def __init__(self, X: np.ndarray, d: DistanceFn):
        self.X = X
        self.d = d
        n = X.shape[0]
        self.matrix = d.rows(X, X) if n <= DISTANCE_CACHE_LIMIT else None

    def row(self, i: int) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix[i]
        return self.d.rows(self.X[i : i + 1], self.X)[0]


@dataclass(frozen=True)
class TrainedOpf:
    """Trained forest: cost / predecessor / label maps plus the cost order.

    Arrays are aligned with ``nodes`` (rows sorted by ascending id);
    ``ordered`` lists node ids by ascending (cost, id).  ``predecessor``
    holds ids, -1 meaning none (prototypes).
    """

    nodes: Dataset
    prototypes: np.ndarray
    predecessor: np.ndarray
    cost: np.ndarray
    out_label: np.ndarray
    ordered: np.ndarray
    _ordered_pos: np.ndarray = field(repr=False, default=None)

    def index_of(self, ids) -> np.ndarray:
        """Positions of the given ids inside the (id-sorted) node arrays."""
        return np.searchsorted(self.nodes.ids, np.asarray(ids))


def _pop_min(queue: np.ndarray) -> int:
    """argmin over the queue; first occurrence wins, i.e. the smallest id
    because node arrays are kept in ascending-id order."""
    return int(np.argmin(queue))


def elect_prototypes(train: Dataset, d: DistanceFn = None) -> np.ndarray:
    """Prototype ids: endpoints of MST edges that cross the class boundary.

    The MST is built with Prim's algorithm on the complete graph; equal
    weights are resolved by the smaller (min-id, max-id) edge key so the
    elected set is deterministic.
    """
    d = as_distance(d)
    ds = train.sorted_by_id()
    c0, c1 = ds.class_counts()
    if c0 == 0 or c1 == 0:
        raise ValueError("prototype election requires both classes in the training set")

    n = ds.n
    ids = ds.ids
    rows = _RowSource(ds.features, d)

    big = np.iinfo(np.int64).max
    dist = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    key_min = np.full(n, big, dtype=np.int64)
    key_max = np.full(n, big, dtype=np.int64)
    in_tree = np.zeros(n, dtype=bool)
    dist[0] = 0.0

    for _ in range(n):
        queue = np.where(in_tree, np.inf, dist)
        u = _pop_min(queue)
        best = queue[u]
        ties = np.flatnonzero(queue == best)
        if ties.size > 1:
            order = np.lexsort((key_max[ties], key_min[ties]))
            u = int(ties[order[0]])
        in_tree[u] = True

        drow = rows.row(u)
        nk_min = np.minimum(ids[u], ids)
        nk_max = np.maximum(ids[u], ids)
        better = ~in_tree & (drow < dist)
        same = (
            ~in_tree
            & (drow == dist)
            & ((nk_min < key_min) | ((nk_min == key_min) & (nk_max < key_max)))
        )
        upd = better | same
        dist[upd] = drow[upd]
        parent[upd] = u
        key_min[upd] = nk_min[upd]
        key_max[upd] = nk_max[upd]

    protos = set()
    for u in range(1, n):
        p = parent[u]
        if p >= 0 and ds.labels[u] != ds.labels[p]:
            protos.add(int(ids[u]))
            protos.add(int(ids[p]))
    return np.array(sorted(protos), dtype=np.int64)


def train(train_ds: Dataset, prototypes, d: DistanceFn = None) -> TrainedOpf:
    """Spread minimax path costs from the prototypes over the complete graph.

    Implements the best-first conquering procedure: repeatedly pop the
    cheapest unfinished sample q and offer ``max(cost(q), d(q, u))`` to every
    other sample, keeping strictly better offers only.  The resulting cost
    map satisfies ``C(u) = min_q max(C(q), d(q, u))`` exactly.
    """
    d = as_distance(d)
    ds = train_ds.sorted_by_id()
    prototypes = np.asarray(sorted(int(p) for p in np.asarray(prototypes).ravel()), dtype=np.int64)
    if prototypes.size == 0:
        raise ValueError("prototype set must be non-empty")
    pos = np.searchsorted(ds.ids, prototypes)
    if (pos >= ds.n).any() or (ds.ids[np.clip(pos, 0, ds.n - 1)] != prototypes).any():
        raise ValueError("prototypes must be a subset of the training ids")

    n = ds.n
    ids = ds.ids
    rows = _RowSource(ds.features, d)

    cost = np.full(n, np.inf)
    cost[pos] = 0.0
    queue = cost.copy()
    pred = np.full(n, -1, dtype=np.int64)
    out_label = np.array(ds.labels, dtype=np.int64)

    for _ in range(n):
        q = _pop_min(queue)
        if queue[q] == np.inf:
            break
        queue[q] = np.inf

        cst = np.maximum(cost[q], rows.row(q))
        # Finished nodes have cost <= cost[q] <= cst, so strict < skips them.
        upd = cst < cost
        if upd.any():
            cost[upd] = cst[upd]
            queue[upd] = cst[upd]
            pred[upd] = ids[q]
            out_label[upd] = out_label[q]

    order = np.lexsort((ids, cost))
    return TrainedOpf(
        nodes=ds,
        prototypes=prototypes,
        predecessor=pred,
        cost=cost,
        out_label=out_label,
        ordered=ids[order],
        _ordered_pos=order,
    )


def fit(train_ds: Dataset, d: DistanceFn = None) -> TrainedOpf:
    """Prototype election followed by training, as one call."""
    d = as_distance(d)
    return train(train_ds, elect_prototypes(train_ds, d), d)


def classify(model: TrainedOpf, sample: np.ndarray, d: DistanceFn = None):
    """Label one sample; returns ``(label, conqueror_id)``.

    Scans training nodes in ascending (cost, id) order and stops as soon as
    the next node's cost already matches the best offer, which cannot be
    beaten because offers are at least the node cost.  The scan order makes
    the tie rule (smaller cost, then smaller id) automatic.
    """
    d = as_distance(d)
    x = np.asarray(sample, dtype=np.float64).reshape(1, -1)
    perm = model._ordered_pos
    costs = model.cost[perm]
    feats = model.nodes.features[perm]

    best = np.inf
    best_at = 0
    n = costs.shape[0]
    for start in range(0, n, _CLASSIFY_CHUNK):
        if costs[start] >= best:
            break
        stop = min(start + _CLASSIFY_CHUNK, n)
        offered = np.maximum(costs[start:stop], d.rows(x, feats[start:stop])[0])
        j = int(np.argmin(offered))
        if offered[j] < best:
            best = offered[j]
            best_at = start + j

    winner = perm[best_at]
    return int(model.out_label[winner]), int(model.nodes.ids[winner])


def predict(model: TrainedOpf, X: np.ndarray, d: DistanceFn = None):
    """Vector version of :func:`classify`; returns (labels, conqueror ids)."""
    d = as_distance(d)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    labels = np.empty(X.shape[0], dtype=np.int64)
    conquerors = np.empty(X.shape[0], dtype=np.int64)
    for i, x in enumerate(X):
        labels[i], conquerors[i] = classify(model, x, d)
    return labels, conquerors
