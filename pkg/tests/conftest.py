import numpy as np
import pytest

from opfbalance import Dataset


def make_ds(features, labels, ids=None, **kw):
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if features.shape[0] == 1 and len(labels) > 1:
        features = features.T
    labels = np.asarray(labels, dtype=np.int64)
    if ids is None:
        ids = np.arange(features.shape[0], dtype=np.int64)
    return Dataset(features, labels, np.asarray(ids, dtype=np.int64), **kw)


def two_class_blobs(seed, n0, n1, dim=2, gap=8.0):
    """Two overlap-free Gaussian blobs with the requested class sizes."""
    rs = np.random.RandomState(seed)
    x0 = rs.normal(0.0, 1.0, size=(n0, dim))
    x1 = rs.normal(gap, 1.0, size=(n1, dim))
    feats = np.vstack([x0, x1])
    labels = np.array([0] * n0 + [1] * n1, dtype=np.int64)
    perm = rs.permutation(n0 + n1)
    return make_ds(feats[perm], labels[perm])


def chain_blob(origin, scale=1.0, jitter=None, angle=0.0):
    """A 5-point blob whose 1-NN graph is a single chain into one mutual pair,
    so it clusters as one group at every neighborhood size."""
    base = np.array([0.0, 1.0, 2.1, 3.3, 4.6]) * scale
    pts = np.stack([base, np.zeros_like(base)], axis=1)
    if jitter is not None:
        pts = pts + jitter
    rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    return pts @ rot.T + np.asarray(origin)


def two_chain_blobs(seed):
    """Two far-apart chain blobs; returns (dataset, blob membership)."""
    rs = np.random.RandomState(seed)
    a = chain_blob((0.0, 0.0), jitter=rs.uniform(-0.03, 0.03, (5, 2)), angle=rs.uniform(0, 2 * np.pi))
    b = chain_blob((500.0, 300.0), jitter=rs.uniform(-0.03, 0.03, (5, 2)), angle=rs.uniform(0, 2 * np.pi))
    return make_ds(np.vstack([a, b]), [0] * 10), np.array([0] * 5 + [1] * 5)


class ZeroRng:
    """Rng stand-in forcing every draw to its lower endpoint."""

    seed = 0

    def uniform(self):
        return 0.0

    def randint(self, low, high):
        return low

    def standard_normal(self, n):
        return np.zeros(n)

    def shuffle(self, values):
        pass

    def child(self, stream_id):
        return self


@pytest.fixture
def zero_rng():
    return ZeroRng()
