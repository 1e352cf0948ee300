import numpy as np
import pytest

from opfbalance import ClassPreservationWarning, score_training, undersample
from opfbalance.undersampling import _prune
from opfbalance import supervised
from conftest import make_ds, two_class_blobs


def hand_score_fixture():
    """20-sample set (14 majority / 6 minority) plus a trained model, with
    scores set by hand for direct policy enumeration."""
    rs = np.random.RandomState(0)
    feats = np.vstack([rs.normal(0, 1, size=(14, 2)), rs.normal(6, 1, size=(6, 2))])
    labels = np.array([0] * 14 + [1] * 6)
    ds = make_ds(feats, labels)
    model = supervised.fit(ds)
    scores = np.array([3, 2, 1, 0, 0, -1, -1, -2, 1, 0, -3, 2, 0, -1,  # majority
                       1, -2, 0, 2, -1, 0])                            # minority
    return ds, model, scores


class TestScoreTraining:
    def test_identical_validation_point_scores_plus_one(self):
        train = make_ds([[0.0], [10.0]], [0, 1])
        val = make_ds([[0.0]], [0])
        scores = score_training(train, val)
        assert scores == {0: 1, 1: 0}

    def test_wrong_class_conqueror_scores_minus_one(self):
        train = make_ds([[0.0], [10.0]], [0, 1])
        val = make_ds([[0.0]], [1])  # conquered by node 0 (label 0), truth is 1
        scores = score_training(train, val)
        assert scores == {0: -1, 1: 0}

    def test_each_validation_sample_votes_once(self):
        train = two_class_blobs(1, 20, 10)
        val = two_class_blobs(2, 8, 7)
        scores = score_training(train, val)
        assert set(scores.keys()) == set(train.ids.tolist())
        assert sum(abs(s) for s in scores.values()) <= val.n
        # +1/-1 votes add to (#correct - #wrong), and every sample votes
        moved = sum(1 for s in scores.values() if s != 0)
        assert moved <= val.n
        assert abs(sum(scores.values())) <= val.n

    def test_empty_validation_unconstructible(self):
        # the Dataset invariant (N >= 1) already rules out an empty val set
        train = make_ds([[0.0], [1.0]], [0, 1])
        with pytest.raises((ValueError, IndexError)):
            train.subset(np.array([], dtype=np.int64))


class TestPolicies:
    def test_us_exact_balance_never_touches_minority(self):
        train = two_class_blobs(3, 40, 12)
        val = two_class_blobs(4, 10, 5)
        out = undersample(train, val, "us")
        assert out.class_counts() == (12, 12)
        minority_ids = set(train.ids[train.labels == 1].tolist())
        assert minority_ids <= set(out.ids.tolist())

    def test_us_removes_lowest_scored_majority(self):
        ds, model, scores = hand_score_fixture()
        removed = _prune(model, scores, "us")
        assert removed.size == 14 - 6
        assert np.all(ds.labels[removed] == 0)
        kept_majority = [p for p in range(14) if p not in set(removed.tolist())]
        worst_kept = min(scores[kept_majority])
        assert max(scores[removed]) <= worst_kept

    def test_us1_vs_us2_vs_us3_enumeration(self):
        ds, model, scores = hand_score_fixture()
        us1 = set(_prune(model, scores, "us1").tolist())
        us2 = set(_prune(model, scores, "us2").tolist())
        us3 = set(_prune(model, scores, "us3").tolist())
        majority = set(range(14))
        assert us1 == {p for p in majority if scores[p] < 0}
        assert us2 == {p for p in majority if scores[p] <= 0}
        assert us3 == {p for p in range(20) if scores[p] < 0}
        assert us1 <= us2

    def test_us1_identity_when_scores_nonnegative(self):
        train = two_class_blobs(5, 15, 8)
        # validation drawn exactly at training points: every vote is correct
        val = train.subset(np.arange(train.n))
        out = undersample(train, val, "us1")
        assert np.array_equal(out.ids, train.ids)
        assert np.array_equal(out.features, train.features)

    def test_us1_subset_of_us2_random_scores(self):
        ds, model, _ = hand_score_fixture()
        for seed in range(20):
            scores = np.random.RandomState(seed).randint(-3, 4, size=20)
            us1 = set(_prune(model, scores, "us1").tolist())
            us2 = set(_prune(model, scores, "us2").tolist())
            assert us1 <= us2

    def test_guard_keeps_top_scored_sample(self):
        ds, model, _ = hand_score_fixture()
        scores = np.full(20, -1)
        scores[3] = 5  # best majority sample
        with pytest.warns(ClassPreservationWarning):
            removed = _prune(model, scores, "us3")
        survivors = set(range(20)) - set(removed.tolist())
        assert 3 in survivors
        assert any(ds.labels[p] == 1 for p in survivors)

    def test_unknown_policy(self):
        train = two_class_blobs(6, 10, 6)
        with pytest.raises(ValueError, match="unknown undersampling policy"):
            undersample(train, train, "us9")

    def test_needs_two_per_class(self):
        train = make_ds([[0.0], [1.0], [2.0]], [0, 0, 1])
        with pytest.raises(ValueError, match="2 samples per class"):
            undersample(train, train, "us")

    def test_deterministic(self):
        train = two_class_blobs(7, 30, 9)
        val = two_class_blobs(8, 6, 6)
        a = undersample(train, val, "us2")
        b = undersample(train, val, "us2")
        assert np.array_equal(a.ids, b.ids)

    def test_dga_shape_balances_exactly(self):
        # 1012 majority / 57 minority: plain undersampling removes 955
        train = two_class_blobs(9, 1012, 57, dim=5)
        val = two_class_blobs(10, 150, 9, dim=5)
        out = undersample(train, val, "us")
        assert out.class_counts() == (57, 57)
        assert out.n == train.n - 955
