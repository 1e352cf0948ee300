import itertools

import numpy as np
import pytest
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist

from opfbalance import EuclideanDistance
from opfbalance.supervised import classify, elect_prototypes, fit, predict, train
from conftest import make_ds

D = EuclideanDistance()


def minimax_closure(dmat):
    """Widest-path (minimax) all-pairs closure; independent of the trainer."""
    mm = dmat.copy()
    n = mm.shape[0]
    for k in range(n):
        mm = np.minimum(mm, np.maximum(mm[:, k][:, None], mm[k, :][None, :]))
    return mm


def oracle_costs(ds, prototypes):
    """Expected Eq-style cost map: min over prototypes of minimax path cost."""
    dmat = D.rows(ds.features, ds.features)
    mm = minimax_closure(dmat)
    proto_pos = np.searchsorted(ds.ids, prototypes)
    return mm[proto_pos, :].min(axis=0)


def all_paths_minimax(dmat, src, dst, n):
    """Literal minimum over every simple path of its maximum edge."""
    best = np.inf
    others = [v for v in range(n) if v not in (src, dst)]
    for r in range(len(others) + 1):
        for mid in itertools.permutations(others, r):
            path = (src, *mid, dst)
            cost = max(dmat[a, b] for a, b in zip(path, path[1:]))
            best = min(best, cost)
    return best


def random_ds(rs, n=None, dim=None):
    n = n or rs.randint(4, 13)
    dim = dim or rs.randint(1, 4)
    labels = np.zeros(n, dtype=int)
    labels[rs.choice(n, rs.randint(1, n), replace=False)] = 1
    if labels.sum() in (0, n):
        labels[0] = 1 - labels[0]
    return make_ds(rs.normal(size=(n, dim)), labels)


class TestElectPrototypes:
    def test_two_samples_both_elected(self):
        ds = make_ds([[0.0], [1.0]], [0, 1])
        assert elect_prototypes(ds).tolist() == [0, 1]

    def test_two_clusters_boundary_pair(self):
        # points 0,1 labeled A and 5,6 labeled B: the single crossing MST
        # edge is (1, 5), so those two samples are the prototypes
        ds = make_ds([[0.0], [1.0], [5.0], [6.0]], [0, 0, 1, 1])
        assert elect_prototypes(ds).tolist() == [1, 2]

    def test_alternating_collinear_all_elected(self):
        ds = make_ds([[0.0], [1.0], [2.0], [3.0]], [0, 1, 0, 1])
        assert elect_prototypes(ds).tolist() == [0, 1, 2, 3]

    def test_single_class_rejected(self):
        ds = make_ds([[0.0], [1.0]], [0, 0])
        with pytest.raises(ValueError, match="both classes"):
            elect_prototypes(ds)

    def test_matches_scipy_mst_on_random_data(self):
        # Continuous random distances make the MST unique, so an independent
        # Kruskal-style construction must elect the same set.
        for seed in range(30):
            rs = np.random.RandomState(seed)
            ds = random_ds(rs)
            dmat = cdist(ds.features, ds.features)
            tree = minimum_spanning_tree(dmat).tocoo()
            expected = set()
            for a, b in zip(tree.row, tree.col):
                if ds.labels[a] != ds.labels[b]:
                    expected.add(int(ds.ids[a]))
                    expected.add(int(ds.ids[b]))
            assert set(elect_prototypes(ds).tolist()) == expected

    def test_at_least_one_prototype_per_class(self):
        for seed in range(20):
            ds = random_ds(np.random.RandomState(100 + seed))
            protos = elect_prototypes(ds)
            pos = np.searchsorted(ds.ids, protos)
            assert set(ds.labels[pos].tolist()) == {0, 1}


class TestTrain:
    def test_prototypes_have_zero_cost_no_predecessor(self):
        ds = make_ds([[0.0], [2.0], [5.0]], [0, 0, 1])
        protos = elect_prototypes(ds)
        model = train(ds, protos, D)
        pos = model.index_of(protos)
        assert np.all(model.cost[pos] == 0.0)
        assert np.all(model.predecessor[pos] == -1)

    def test_chain_costs(self):
        # single prototype at 0; d(P,a)=2, d(a,b)=3, d(P,b)=5
        ds = make_ds([[0.0], [2.0], [5.0]], [0, 0, 0], ids=[0, 1, 2])
        model = train(ds, [0], D)
        assert model.cost.tolist() == [0.0, 2.0, 3.0]
        assert model.out_label.tolist() == [0, 0, 0]
        assert model.predecessor.tolist() == [-1, 0, 1]

    def test_matches_exhaustive_minimax_oracle(self):
        for seed in range(40):
            rs = np.random.RandomState(seed)
            ds = random_ds(rs)
            protos = elect_prototypes(ds)
            model = train(ds, protos, D)
            assert np.array_equal(model.cost, oracle_costs(ds, protos))

    def test_closure_agrees_with_literal_path_enumeration(self):
        # sanity for the oracle itself on sizes where enumeration is feasible
        for seed in range(10):
            rs = np.random.RandomState(500 + seed)
            n = rs.randint(3, 7)
            pts = rs.normal(size=(n, 2))
            dmat = cdist(pts, pts)
            mm = minimax_closure(dmat)
            for i in range(n):
                for j in range(n):
                    if i != j:
                        assert mm[i, j] == pytest.approx(all_paths_minimax(dmat, i, j, n), abs=0)

    def test_forest_reaches_prototype(self):
        for seed in range(10):
            ds = random_ds(np.random.RandomState(300 + seed))
            model = fit(ds)
            proto_set = set(model.prototypes.tolist())
            for start in model.nodes.ids:
                node, steps = int(start), 0
                while node not in proto_set:
                    node = int(model.predecessor[model.index_of([node])[0]])
                    steps += 1
                    assert steps <= ds.n, "predecessor chain did not reach a prototype"

    def test_no_single_edge_relaxation_improves(self):
        for seed in range(10):
            ds = random_ds(np.random.RandomState(600 + seed))
            model = fit(ds)
            dmat = D.rows(model.nodes.features, model.nodes.features)
            offered = np.maximum(model.cost[:, None], dmat)
            assert np.all(model.cost[None, :] <= offered + 0)

    def test_ordered_is_cost_sorted_permutation(self):
        ds = random_ds(np.random.RandomState(42))
        model = fit(ds)
        assert sorted(model.ordered.tolist()) == sorted(ds.ids.tolist())
        costs = model.cost[model.index_of(model.ordered)]
        assert np.all(np.diff(costs) >= 0)

    def test_nonproto_cost_is_max_of_pred_cost_and_edge(self):
        ds = random_ds(np.random.RandomState(9))
        model = fit(ds)
        for i in range(ds.n):
            p = model.predecessor[i]
            if p == -1:
                continue
            pp = model.index_of([p])[0]
            edge = D.pair(model.nodes.features[i], model.nodes.features[pp])
            assert model.cost[i] == pytest.approx(max(model.cost[pp], edge), abs=0)
            assert model.out_label[i] == model.out_label[pp]

    def test_bad_prototypes_rejected(self):
        ds = make_ds([[0.0], [1.0]], [0, 1])
        with pytest.raises(ValueError):
            train(ds, [], D)
        with pytest.raises(ValueError):
            train(ds, [99], D)


class TestClassify:
    def test_two_prototype_line(self):
        ds = make_ds([[0.0], [10.0]], [0, 1])
        model = train(ds, [0, 1], D)
        label, conqueror = classify(model, [2.0], D)
        assert (label, conqueror) == (0, 0)

    def test_training_point_offer_is_its_cost(self):
        ds = make_ds([[0.0], [2.0], [5.0]], [0, 0, 1])
        model = fit(ds)
        for i in range(ds.n):
            label, conq = classify(model, ds.features[i], D)
            assert label == model.out_label[i]

    def test_early_stop_equals_full_scan(self):
        rs = np.random.RandomState(77)
        ds = make_ds(rs.normal(size=(60, 3)), rs.permutation([0] * 35 + [1] * 25))
        model = fit(ds)
        samples = rs.normal(size=(200, 3)) * 2
        dfull = D.rows(samples, model.nodes.features)
        for i in range(200):
            offered = np.maximum(model.cost, dfull[i])
            best = offered.min()
            winners = np.flatnonzero(offered == best)
            # tie rule: smaller cost, then smaller id
            order = np.lexsort((model.nodes.ids[winners], model.cost[winners]))
            expect_id = int(model.nodes.ids[winners[order[0]]])
            expect_label = int(model.out_label[winners[order[0]]])
            label, conq = classify(model, samples[i], D)
            assert (label, conq) == (expect_label, expect_id)

    def test_zero_training_error(self):
        for seed in range(8):
            rs = np.random.RandomState(800 + seed)
            ds = make_ds(rs.normal(size=(25, 2)), rs.permutation([0] * 15 + [1] * 10))
            model = fit(ds)
            labels, _ = predict(model, model.nodes.features, D)
            assert np.array_equal(labels, model.out_label)

    def test_deterministic(self):
        rs = np.random.RandomState(13)
        ds = make_ds(rs.normal(size=(30, 2)), rs.permutation([0] * 20 + [1] * 10))
        model = fit(ds)
        x = rs.normal(size=2)
        assert classify(model, x, D) == classify(model, x, D)


class TestDistanceRegimes:
    def test_on_demand_rows_match_cached_matrix(self, monkeypatch):
        # forcing the cache limit to 0 must not change any training output
        rs = np.random.RandomState(99)
        ds = make_ds(rs.normal(size=(40, 3)), rs.permutation([0] * 25 + [1] * 15))
        cached = fit(ds)
        import opfbalance.supervised as sup

        monkeypatch.setattr(sup, "DISTANCE_CACHE_LIMIT", 0)
        on_demand = fit(ds)
        assert np.array_equal(cached.cost, on_demand.cost)
        assert np.array_equal(cached.predecessor, on_demand.predecessor)
        assert np.array_equal(cached.prototypes, on_demand.prototypes)
