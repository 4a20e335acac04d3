import itertools
import json

import numpy as np
import pytest

from adtomo.forest import (
    ForestParams,
    HyperGrid,
    Sample,
    accuracy,
    cross_validate_grid,
    entropy,
    feature_importance,
    predict,
    predict_batch,
    train_forest,
    train_tree,
)


def make_samples(X, y, personas=None):
    return [Sample(tuple(int(v) for v in row), bool(label),
                   personas[i] if personas else f"p{i:03d}")
            for i, (row, label) in enumerate(zip(X, y))]


def separable_samples(n=64, n_features=5, seed=0, personas=None):
    """Feature 0 fully determines the label; the rest is coin flips."""
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 2, size=(n, n_features))
    y = X[:, 0] == 1
    return make_samples(X, y, personas)


XOR_SAMPLES = make_samples([(0, 0), (0, 1), (1, 0), (1, 1)],
                           [False, True, True, False])

ALL_FEATURES = ForestParams(n_trees=1, max_depth=None, features_per_split="all",
                            min_leaf=1)


class TestEntropy:
    def test_uniform(self):
        assert entropy([True] * 5 + [False] * 5) == 1.0

    def test_pure(self):
        assert entropy([True] * 8) == 0.0

    def test_hand_computed(self):
        # -(3/4)log2(3/4) - (1/4)log2(1/4)
        assert entropy([True, True, True, False]) == pytest.approx(0.8113, abs=1e-4)

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            entropy([])


class TestTrainTree:
    def test_single_perfect_split(self):
        tree = train_tree(separable_samples(), ALL_FEATURES, seed=1)
        assert tree.depth() == 1
        assert int(tree.feature[0]) == 0

    def test_pure_labels_single_leaf(self):
        samples = make_samples([(0, 1), (1, 0), (1, 1)], [True, True, True])
        tree = train_tree(samples, ALL_FEATURES, seed=1)
        assert tree.n_nodes == 1
        assert bool(tree.label[0]) is True

    def test_xor_learnable_at_depth_two(self):
        # Exhaustive oracle: best training accuracy of any depth-d stump tree.
        def best_tree_accuracy(depth):
            pts = [(f, l) for f, l in
                   zip([s.features for s in XOR_SAMPLES], [s.label for s in XOR_SAMPLES])]

            def best(rows, d):
                pos = sum(l for _, l in rows)
                majority_acc = max(pos, len(rows) - pos)
                if d == 0 or not rows:
                    return majority_acc
                out = majority_acc
                for feat in range(2):
                    lo = [(f, l) for f, l in rows if f[feat] == 0]
                    hi = [(f, l) for f, l in rows if f[feat] == 1]
                    if lo and hi:
                        out = max(out, best(lo, d - 1) + best(hi, d - 1))
                return out

            return best(pts, depth) / len(pts)

        assert best_tree_accuracy(1) < 1.0
        assert best_tree_accuracy(2) == 1.0

        for max_depth in (2, 3, None):
            params = ForestParams(n_trees=1, max_depth=max_depth,
                                  features_per_split="all", min_leaf=1)
            tree = train_tree(XOR_SAMPLES, params, seed=5)
            assert tree.depth() == 2
            for s in XOR_SAMPLES:
                node = 0
                while tree.feature[node] >= 0:
                    node = (tree.left[node] if s.features[tree.feature[node]] == 0
                            else tree.right[node])
                assert bool(tree.label[node]) == s.label

    def test_max_depth_respected(self):
        params = ForestParams(n_trees=1, max_depth=1, features_per_split="all",
                              min_leaf=1)
        tree = train_tree(XOR_SAMPLES, params, seed=5)
        assert tree.depth() <= 1

    def test_min_leaf_respected(self):
        samples = make_samples([(0,), (1,), (1,), (1,)],
                               [False, True, True, True])
        params = ForestParams(n_trees=1, max_depth=None, features_per_split="all",
                              min_leaf=2)
        tree = train_tree(samples, params, seed=0)
        assert tree.n_nodes == 1  # the only split would leave a 1-sample side

    def test_leaf_counts_sum_to_sample_size(self):
        samples = separable_samples(n=50, seed=3)
        tree = train_tree(samples, ALL_FEATURES, seed=9)
        leaves = tree.feature < 0
        assert int(tree.n_samples[leaves].sum()) == 50

    def test_consistent_duplicate_free_data_fit_exactly(self):
        rng = np.random.default_rng(11)
        X = np.array(list(itertools.product([0, 1], repeat=5)))
        y = rng.integers(0, 2, size=len(X)).astype(bool)
        samples = make_samples(X, y)
        tree = train_tree(samples, ALL_FEATURES, seed=2)
        correct = 0
        for s in samples:
            node = 0
            while tree.feature[node] >= 0:
                node = (tree.left[node] if s.features[tree.feature[node]] == 0
                        else tree.right[node])
            correct += bool(tree.label[node]) == s.label
        assert correct == len(samples)


class TestForest:
    def test_single_tree_forest_equals_tree_on_bootstrap(self):
        # With all-feature splits no subset draws occur, so the forest's only
        # tree must equal train_tree applied to its bootstrap sample.
        from adtomo.rng import splitmix64, substream_key

        samples = separable_samples(n=40, seed=4)
        params = ForestParams(n_trees=1, max_depth=None, features_per_split="all",
                              min_leaf=1)
        model = train_forest(samples, params, seed=21)

        from adtomo.forest import canonicalize
        ordered = canonicalize(samples)
        state = substream_key(21, "tree", 0)
        boot = []
        for _ in range(len(ordered)):
            state, draw = splitmix64(state)
            boot.append(ordered[draw % len(ordered)])
        direct = train_tree(boot, params, seed=0)  # seed unused: no subset draws
        assert json.dumps(model.trees[0].to_dict()) == json.dumps(direct.to_dict())

    def test_separable_holdout_perfect(self):
        train = separable_samples(n=64, seed=5)
        holdout = separable_samples(n=32, seed=6)
        for params in HyperGrid().points()[:4]:
            model = train_forest(train, params, seed=13)
            assert accuracy(model, holdout) == 1.0

    def test_retrain_determinism(self):
        samples = separable_samples(n=48, seed=7)
        params = ForestParams(n_trees=20, max_depth=None, features_per_split="sqrt")
        m1 = train_forest(samples, params, seed=3)
        m2 = train_forest(samples, params, seed=3)
        assert json.dumps(m1.to_dict()) == json.dumps(m2.to_dict())

    def test_sample_order_does_not_matter(self):
        samples = separable_samples(n=48, seed=8)
        params = ForestParams(n_trees=10, features_per_split="sqrt")
        m1 = train_forest(samples, params, seed=4)
        m2 = train_forest(list(reversed(samples)), params, seed=4)
        assert json.dumps(m1.to_dict()) == json.dumps(m2.to_dict())

    def test_predict_majority_and_tie(self):
        samples = separable_samples(n=32, seed=9)
        model = train_forest(samples, ForestParams(n_trees=3, features_per_split="all"),
                             seed=5)
        assert predict(model, (1, 0, 0, 0, 0)) is True
        assert predict(model, (0, 1, 1, 1, 1)) is False

    def test_vote_counting_on_hand_built_trees(self):
        from adtomo.forest import ForestModel, Tree

        def leaf(label):
            return Tree(feature=np.array([-1], dtype=np.int32),
                        left=np.array([-1], dtype=np.int32),
                        right=np.array([-1], dtype=np.int32),
                        n_samples=np.array([4], dtype=np.int32),
                        gain=np.zeros(1), label=np.array([label], dtype=np.uint8))

        params = ForestParams(n_trees=1, features_per_split="all")
        single = ForestModel((leaf(1),), params, seed=0, n_features=2)
        assert predict(single, (0, 1)) is True  # the one tree's leaf label

        votes_ttf = ForestModel((leaf(1), leaf(1), leaf(0)), params, 0, 2)
        assert predict(votes_ttf, (0, 0)) is True  # {T, T, F} -> majority true

        tied = ForestModel((leaf(1), leaf(0)), params, 0, 2)
        assert predict(tied, (0, 0)) is False  # exact tie resolves to false

    def test_prediction_invariant_under_tree_permutation(self):
        import dataclasses

        rng = np.random.default_rng(10)
        samples = make_samples(rng.integers(0, 2, (60, 4)),
                               rng.integers(0, 2, 60).astype(bool))
        model = train_forest(samples, ForestParams(n_trees=9), seed=6)
        X = rng.integers(0, 2, (100, 4)).astype(np.uint8)
        base = predict_batch(model, X)
        for _ in range(5):
            perm = rng.permutation(len(model.trees))
            shuffled = dataclasses.replace(model, trees=tuple(model.trees[i] for i in perm))
            assert np.array_equal(predict_batch(shuffled, X), base)

    def test_feature_length_mismatch(self):
        model = train_forest(separable_samples(), ForestParams(n_trees=2), seed=1)
        with pytest.raises(ValueError):
            predict(model, (1, 0))


class TestImportance:
    def test_single_split_concentrates(self):
        samples = separable_samples(n=40, seed=11)
        params = ForestParams(n_trees=1, max_depth=1, features_per_split="all")
        model = train_forest(samples, params, seed=7)
        imp = feature_importance(model)
        assert imp[0] == pytest.approx(1.0, abs=1e-12)
        assert imp[1:].sum() == 0.0

    def test_all_leaf_forest_zero_vector(self):
        samples = make_samples([(0, 1)] * 6, [True] * 6)
        model = train_forest(samples, ForestParams(n_trees=5), seed=8)
        imp = feature_importance(model)
        assert imp.sum() == 0.0

    def test_matches_hand_weighted_bookkeeping(self):
        samples = XOR_SAMPLES
        params = ForestParams(n_trees=1, max_depth=None, features_per_split="all",
                              min_leaf=1)
        tree = train_tree(samples, params, seed=0)
        # Root splits feature 0 with gain 0; both depth-1 nodes split feature 1
        # with gain 1 over half the samples each: raw = [0, 2 * (2/4) * 1].
        expected = np.array([0.0, 1.0])
        model = train_forest(samples, ForestParams(n_trees=1, features_per_split="all"),
                             seed=0)
        del model  # importance checked on the deterministic no-bootstrap tree
        raw = np.zeros(2)
        for node in range(tree.n_nodes):
            if tree.feature[node] >= 0:
                raw[tree.feature[node]] += (tree.n_samples[node] / tree.n_samples[0]
                                            ) * tree.gain[node]
        assert raw == pytest.approx(expected, abs=1e-9)

    def test_importances_sum_to_one(self):
        rng = np.random.default_rng(12)
        samples = make_samples(rng.integers(0, 2, (80, 6)),
                               rng.integers(0, 2, 80).astype(bool))
        model = train_forest(samples, ForestParams(n_trees=30), seed=9)
        assert feature_importance(model).sum() == pytest.approx(1.0, abs=1e-9)

    def test_discriminative_feature_tops(self):
        for seed in range(20):
            samples = separable_samples(n=60, seed=100 + seed)
            model = train_forest(samples, ForestParams(n_trees=25), seed=seed)
            imp = feature_importance(model)
            assert imp[0] > max(imp[1:])


class TestCrossValidation:
    def test_single_point_grid(self):
        grid = HyperGrid(n_trees=(10,), max_depth=(3,), features_per_split=("all",),
                         min_leaf=(1,))
        samples = separable_samples(n=32, seed=13,
                                    personas=[f"p{i % 4}" for i in range(32)])
        params, acc = cross_validate_grid(samples, grid, folds=4, seed=1)
        assert params == ForestParams(10, 3, "all", 1)

    def test_separable_reaches_perfect_cv(self):
        samples = []
        rng = np.random.default_rng(14)
        for p in range(8):
            X = rng.integers(0, 2, size=(8, 4))
            for row in X:
                samples.append(Sample(tuple(int(v) for v in row), bool(row[0]), f"p{p}"))
        grid = HyperGrid(n_trees=(10, 20), max_depth=(3,), features_per_split=("all",),
                         min_leaf=(1,))
        params, acc = cross_validate_grid(samples, grid, folds=4, seed=2)
        assert acc == 1.0

    def test_fold_balance_per_persona(self):
        from adtomo.forest.model import _fold_assignment, canonicalize

        samples = []
        rng = np.random.default_rng(15)
        for p in range(6):
            for _ in range(8):
                samples.append(Sample(tuple(rng.integers(0, 2, 3)), bool(rng.integers(2)),
                                      f"persona-{p}"))
        ordered = canonicalize(samples)
        assignment = _fold_assignment(ordered, folds=4, seed=3)
        for p in range(6):
            idxs = [i for i, s in enumerate(ordered) if s.persona == f"persona-{p}"]
            counts = np.bincount(assignment[idxs], minlength=4)
            assert counts.tolist() == [2, 2, 2, 2]

    def test_indivisible_counts_rejected(self):
        samples = [Sample((0,), False, "p1")] * 7
        with pytest.raises(ValueError, match="divisible"):
            cross_validate_grid(samples, HyperGrid(n_trees=(5,)), folds=4, seed=1)

    def test_grid_points_canonical_order(self):
        grid = HyperGrid(n_trees=(100, 50), max_depth=(None, 3),
                         features_per_split=("sqrt", "all"), min_leaf=(2, 1))
        pts = grid.points()
        assert pts[0] == ForestParams(50, 3, "all", 1)
        assert pts[-1] == ForestParams(100, None, "sqrt", 2)
        keys = [p.sort_key() for p in pts]
        assert keys == sorted(keys)
