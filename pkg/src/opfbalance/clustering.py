"""Unsupervised optimum-path forest: k-NN graph, densities, conquering, best-k.

Each sample is weighted by a Parzen-style density over its k-neighborhood:

    rho(q) = 1 / (sqrt(2 pi psi^2) k) * sum_{u in A_k(q)} exp(-d(q,u)^2 / (2 psi^2))

with psi = m_w / 3 and m_w the maximum stored arc weight.  Conquering runs
max-cost-first from density maxima: an unconquered pop becomes a prototype
(cost reset to its density, fresh cluster label), and neighbors are offered
``min(cost(q), rho(u))`` over the symmetrized adjacency.

``best_k`` scores every k in 1..k_max with a normalized cut over the stored
directed arcs, arc affinity 1/d (capped at 1e12 for zero distances), and
keeps the k minimizing the cut (ties -> smaller k).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .distance import DistanceFn, as_distance

ZERO_DISTANCE_AFFINITY = 1e12


@dataclass(frozen=True)
class KnnGraph:
    """Directed k-NN lists (for density) plus symmetrized adjacency (for propagation)."""

    k: int
    ids: np.ndarray
    features: np.ndarray
    adjacency: np.ndarray          # n x k neighbor positions, nearest first
    arc_dists: np.ndarray          # n x k distances matching adjacency
    adj_sym: list = field(repr=False, default=None)
    max_weight: float = 0.0
    densities: np.ndarray = None

    @property
    def n(self) -> int:
        return self.ids.shape[0]


@dataclass(frozen=True)
class ClusterForest:
    """Conquering output: one prototype (pdf maximum) per cluster."""

    ids: np.ndarray
    predecessor: np.ndarray        # predecessor ids, -1 for roots
    cost: np.ndarray
    cluster_label: np.ndarray      # 0..c-1, discovery order
    prototype_ids: np.ndarray      # one per cluster, discovery order
    graph: KnnGraph = field(repr=False, default=None)

    @property
    def n_clusters(self) -> int:
        return self.prototype_ids.shape[0]

    def members(self) -> list:
        """Per-cluster id arrays (ascending ids within each cluster)."""
        return [self.ids[self.cluster_label == c] for c in range(self.n_clusters)]


def _sorted_neighbors(features: np.ndarray, d: DistanceFn):
    """All-pairs distances plus each row's neighbor order by (distance, id).

    Rows must already be in ascending-id order; stable argsort then breaks
    distance ties by the smaller id.
    """
    dmat = d.rows(features, features)
    work = dmat.copy()
    np.fill_diagonal(work, np.inf)
    order = np.argsort(work, axis=1, kind="stable")
    return dmat, order


def _symmetrize(adjacency: np.ndarray, n: int) -> list:
    src = np.repeat(np.arange(n, dtype=np.int64), adjacency.shape[1])
    dst = adjacency.ravel().astype(np.int64)
    a = np.concatenate([src, dst])
    b = np.concatenate([dst, src])
    enc = np.unique(a * n + b)
    sa, sb = enc // n, enc % n
    cuts = np.searchsorted(sa, np.arange(1, n))
    return np.split(sb, cuts)


def _densities(arc_dists: np.ndarray, k: int, m_w: float) -> np.ndarray:
    if m_w == 0.0:
        return np.ones(arc_dists.shape[0])
    psi = m_w / 3.0
    scale = 1.0 / (np.sqrt(2.0 * np.pi * psi * psi) * k)
    return scale * np.exp(-(arc_dists**2) / (2.0 * psi * psi)).sum(axis=1)


def _graph_from_order(ids, features, dmat, order, k) -> KnnGraph:
    adjacency = order[:, :k]
    arc_dists = np.take_along_axis(dmat, adjacency, axis=1)
    m_w = float(arc_dists.max())
    return KnnGraph(
        k=k,
        ids=ids,
        features=features,
        adjacency=adjacency,
        arc_dists=arc_dists,
        adj_sym=_symmetrize(adjacency, ids.shape[0]),
        max_weight=m_w,
        densities=_densities(arc_dists, k, m_w),
    )


def build_knn_graph(data: Dataset, k: int, d: DistanceFn = None) -> KnnGraph:
    """k nearest neighbors per node (ties -> smaller id) plus densities."""
    d = as_distance(d)
    ds = data.sorted_by_id()
    if not 1 <= k <= ds.n - 1:
        raise ValueError(f"k must be in [1, {ds.n - 1}], got {k}")
    dmat, order = _sorted_neighbors(ds.features, d)
    return _graph_from_order(ds.ids, ds.features, dmat, order, k)


def cluster(graph: KnnGraph) -> ClusterForest:
    """Max-cost-first conquering; every unconquered pop founds a cluster.

    Initial costs are ``rho - delta`` with delta relative to the density
    range (floor 1e-12); pop ties go to the smaller id.
    """
    rho = graph.densities
    n = graph.n
    delta = max(1e-12, 1e-6 * float(rho.max() - rho.min()))

    cost = rho - delta
    pred = np.full(n, -1, dtype=np.int64)
    label = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=bool)

    # Positions coincide with ascending ids, so (−cost, position) pops the
    # maximum cost with smaller-id ties.
    heap = [(-cost[i], i) for i in range(n)]
    heapq.heapify(heap)
    prototypes = []

    while heap:
        negc, q = heapq.heappop(heap)
        if done[q] or -negc != cost[q]:
            continue
        done[q] = True
        if pred[q] == -1:
            label[q] = len(prototypes)
            prototypes.append(int(graph.ids[q]))
            cost[q] = rho[q]
        for u in graph.adj_sym[q]:
            if done[u] or cost[u] >= cost[q]:
                continue
            offered = min(cost[q], rho[u])
            if offered > cost[u]:
                cost[u] = offered
                pred[u] = q
                label[u] = label[q]
                heapq.heappush(heap, (-offered, u))

    pred_ids = np.where(pred >= 0, graph.ids[np.clip(pred, 0, None)], -1)
    return ClusterForest(
        ids=graph.ids,
        predecessor=pred_ids,
        cost=cost,
        cluster_label=label,
        prototype_ids=np.array(prototypes, dtype=np.int64),
        graph=graph,
    )


def normalized_cut(graph: KnnGraph, cluster_label: np.ndarray) -> float:
    """Sum over clusters of inter-affinity / (intra + inter affinity).

    Affinity of a stored directed arc is 1/d, capped for zero distances;
    each arc counts toward its source node's cluster.
    """
    n, k = graph.adjacency.shape
    src = np.repeat(np.arange(n), k)
    dst = graph.adjacency.ravel()
    dists = graph.arc_dists.ravel()
    w = np.where(dists > 0, 1.0 / np.where(dists > 0, dists, 1.0), ZERO_DISTANCE_AFFINITY)
    w = np.minimum(w, ZERO_DISTANCE_AFFINITY)

    same = cluster_label[src] == cluster_label[dst]
    c = int(cluster_label.max()) + 1
    intra = np.bincount(cluster_label[src[same]], weights=w[same], minlength=c)
    inter = np.bincount(cluster_label[src[~same]], weights=w[~same], minlength=c)
    total = intra + inter
    return float((inter[total > 0] / total[total > 0]).sum())


def best_k(data: Dataset, k_max: int, d: DistanceFn = None):
    """Pick k in 1..k_max minimizing the normalized cut; returns (k*, forest).

    The pairwise distances and the neighbor ordering are computed once and
    sliced per k, which yields graphs identical to :func:`build_knn_graph`.
    """
    d = as_distance(d)
    ds = data.sorted_by_id()
    if not 1 <= k_max <= ds.n - 1:
        raise ValueError(f"k_max must be in [1, {ds.n - 1}], got {k_max}")
    dmat, order = _sorted_neighbors(ds.features, d)

    best = None
    for k in range(1, k_max + 1):
        graph = _graph_from_order(ds.ids, ds.features, dmat, order, k)
        forest = cluster(graph)
        score = normalized_cut(graph, forest.cluster_label)
        if best is None or score < best[0]:
            best = (score, k, forest)
    return best[1], best[2]
