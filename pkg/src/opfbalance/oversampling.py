"""Cluster-based minority oversampling.

The minority class of the training set is clustered (best-k search over its
own k-NN graphs), the synthetic budget ``n_s`` is allocated across clusters
proportionally to their sizes, and each cluster emits samples from a
Gaussian fitted to its members:

* ``standard`` - draw ``z = mean + L g`` with ``L`` the (regularized)
  Cholesky factor of the sample covariance and ``g`` standard normal;
* ``p``        - same draw centered on the cluster's prototype sample;
* ``mi``       - draw ``z`` as standard, then blend with its nearest
  cluster member ``p``: ``z' = (1 - a) p + a z``, ``a ~ U(0, 1)``;
* ``wi``       - center the draw on the density-weighted member mean, then
  blend exactly like ``mi``;
* ``ri``       - no Gaussian: pick a uniform member ``x_r`` and interpolate
  toward the cluster's geometric median ``g`` with
  ``b ~ U(0, 1 / (1 + d(g, x_r)))``; the median is recomputed (including
  the fresh synthetic) after every emission.

Every cluster draws from its own child stream, derived from the caller's
generator as ``rng.child(cluster_index + 1)``, so emission is reproducible
and clusters could be processed independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .distance import DistanceFn, as_distance
from .clustering import best_k
from .rng import Rng

OVER_VARIANTS = ("standard", "ri", "mi", "p", "wi")

WEISZFELD_TOL = 1e-8
WEISZFELD_MAX_ITER = 1000


@dataclass(frozen=True)
class OverPolicy:
    """Variant tag plus the best-k search ceiling."""

    variant: str = "standard"
    k_max: int = 5

    def __post_init__(self):
        if self.variant not in OVER_VARIANTS:
            raise ValueError(f"unknown oversampling variant {self.variant!r}; expected one of {OVER_VARIANTS}")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")


@dataclass
class ClusterModel:
    """Fitted per-cluster generator state."""

    member_ids: np.ndarray
    members: np.ndarray
    densities: np.ndarray
    prototype: np.ndarray
    center: np.ndarray
    covariance: np.ndarray
    chol: np.ndarray
    allocation: int = 0


@dataclass(frozen=True)
class OversampleInfo:
    """Bookkeeping returned alongside the resampled dataset."""

    k_star: int
    cluster_sizes: tuple
    allocations: tuple
    synthetic_ids: np.ndarray


def allocate(sizes, n_s: int) -> np.ndarray:
    """Proportional floor allocation of ``n_s`` across cluster sizes.

    The floored base can under-produce; the remainder is handed out one per
    cluster in descending size order (ties -> smaller cluster index) so the
    total is exactly ``n_s``.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    if n_s < 1:
        raise ValueError("n_s must be >= 1")
    total = int(sizes.sum())
    if total < 1:
        raise ValueError("cluster sizes must sum to >= 1")
    base = (sizes * n_s) // total
    remainder = int(n_s - base.sum())
    if remainder > 0:
        order = sorted(range(len(sizes)), key=lambda i: (-sizes[i], i))
        for i in order[:remainder]:
            base[i] += 1
    return base


def geometric_median(points: np.ndarray, tol: float = WEISZFELD_TOL,
                     max_iter: int = WEISZFELD_MAX_ITER, init: np.ndarray = None) -> np.ndarray:
    """Weiszfeld iteration; distances are offset by 1e-12 so a member hit
    never divides by zero."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    g = points.mean(axis=0) if init is None else np.array(init, dtype=np.float64)
    for _ in range(max_iter):
        dist = np.sqrt(((points - g) ** 2).sum(axis=1)) + 1e-12
        w = 1.0 / dist
        new = (points * w[:, None]).sum(axis=0) / w.sum()
        if np.sqrt(((new - g) ** 2).sum()) < tol:
            return new
        g = new
    return g


def _sample_covariance(members: np.ndarray) -> np.ndarray:
    n, dim = members.shape
    if n < 2:
        return np.zeros((dim, dim))
    cov = np.cov(members, rowvar=False, ddof=1)
    return np.atleast_2d(cov)


def _regularized_cholesky(cov: np.ndarray) -> tuple:
    """Cholesky factor, adding eps*I (eps = 1e-6 trace/D, floor 1e-9) when
    the plain factorization fails; eps escalates tenfold if ever needed."""
    dim = cov.shape[0]
    try:
        return cov, np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    eps = max(1e-6 * float(np.trace(cov)) / dim, 1e-9)
    for _ in range(60):
        candidate = cov + eps * np.eye(dim)
        try:
            return candidate, np.linalg.cholesky(candidate)
        except np.linalg.LinAlgError:
            eps *= 10.0
    raise np.linalg.LinAlgError("covariance could not be regularized to positive definite")


def _fit_cluster(member_pos: np.ndarray, forest, variant: str, d: DistanceFn,
                 cluster_index: int) -> ClusterModel:
    graph = forest.graph
    members = graph.features[member_pos]
    densities = graph.densities[member_pos]
    proto_id = int(forest.prototype_ids[cluster_index])
    proto_pos = int(np.searchsorted(graph.ids, proto_id))
    prototype = graph.features[proto_pos]

    if variant == "p":
        center = prototype.copy()
    elif variant == "wi":
        center = (members * densities[:, None]).sum(axis=0) / densities.sum()
    elif variant == "ri":
        center = geometric_median(members)
    else:  # standard, mi
        center = members.mean(axis=0)

    cov, chol = _regularized_cholesky(_sample_covariance(members))
    return ClusterModel(
        member_ids=graph.ids[member_pos],
        members=members,
        densities=densities,
        prototype=prototype,
        center=center,
        covariance=cov,
        chol=chol,
    )


def _nearest_member(model: ClusterModel, z: np.ndarray, d: DistanceFn) -> np.ndarray:
    dists = d.rows(z[None, :], model.members)[0]
    return model.members[int(np.argmin(dists))]


def _emit(model: ClusterModel, variant: str, count: int, crng: Rng, d: DistanceFn) -> np.ndarray:
    dim = model.members.shape[1]
    out = np.empty((count, dim))
    if variant == "ri":
        g = model.center
        pool = list(model.members)
        for i in range(count):
            x_r = model.members[crng.randint(0, model.members.shape[0])]
            bound = 1.0 / (1.0 + d.pair(g, x_r))
            beta = crng.uniform() * bound
            z = beta * x_r + (1.0 - beta) * g
            out[i] = z
            pool.append(z)
            g = geometric_median(np.asarray(pool), init=g)
        return out

    for i in range(count):
        z = model.center + model.chol @ crng.standard_normal(dim)
        if variant in ("mi", "wi"):
            p = _nearest_member(model, z, d)
            alpha = crng.uniform()
            z = (1.0 - alpha) * p + alpha * z
        out[i] = z
    return out


def oversample(train: Dataset, n_s: int, policy: OverPolicy, rng: Rng,
               d: DistanceFn = None, return_info: bool = False):
    """Append ``n_s`` synthetic minority samples to ``train``.

    The minority subset is clustered with ``best_k`` (k_max clamped to
    minority size - 1), the budget is allocated per cluster, and clusters
    with zero allocation are skipped.  Real rows pass through unchanged;
    synthetics get fresh ids above the existing maximum.
    """
    d = as_distance(d)
    if n_s < 1:
        raise ValueError("n_s must be >= 1")
    ds = train.sorted_by_id()
    minority = ds.minority_label()
    min_pos = np.flatnonzero(ds.labels == minority)
    if min_pos.size < 2:
        raise ValueError("oversampling requires at least 2 minority samples")

    minority_ds = ds.subset(min_pos)
    k_max = min(policy.k_max, minority_ds.n - 1)
    k_star, forest = best_k(minority_ds, k_max, d)

    member_pos = [np.flatnonzero(forest.cluster_label == c) for c in range(forest.n_clusters)]
    sizes = [int(p.size) for p in member_pos]
    allocations = allocate(sizes, n_s)

    synth_blocks = []
    for c, pos in enumerate(member_pos):
        count = int(allocations[c])
        if count == 0:
            continue
        model = _fit_cluster(pos, forest, policy.variant, d, c)
        model.allocation = count
        synth_blocks.append(_emit(model, policy.variant, count, rng.child(c + 1), d))

    synth = np.vstack(synth_blocks)
    first_id = int(ds.ids.max()) + 1
    synth_ids = np.arange(first_id, first_id + n_s, dtype=np.int64)
    out = Dataset(
        np.vstack([ds.features, synth]),
        np.concatenate([ds.labels, np.full(n_s, minority, dtype=np.int64)]),
        np.concatenate([ds.ids, synth_ids]),
        feature_names=ds.feature_names,
        label_name=ds.label_name,
        label_values=ds.label_values,
    )
    if return_info:
        info = OversampleInfo(
            k_star=k_star,
            cluster_sizes=tuple(sizes),
            allocations=tuple(int(a) for a in allocations),
            synthetic_ids=synth_ids,
        )
        return out, info
    return out
