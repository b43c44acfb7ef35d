import math

import numpy as np
import pytest

from hobs.forest import (ForestParams, Internal, Leaf, RandomForestModel,
                         best_split, binary_entropy, gini, iter_leaves,
                         predict_p_below, predict_p_below_batch, train_forest,
                         train_tree)
from hobs.geometry import Label
from oracles import brute_force_best_split


def separable_dataset():
    X = np.full((40, 13), 0.5)
    X[:20, 0] = 0.1
    X[20:, 0] = 0.9
    y = np.array([Label.ABOVE] * 20 + [Label.BELOW] * 20, dtype=np.uint8)
    return X, y


def random_dataset(rng, n=120, n_features=13):
    X = rng.normal(size=(n, n_features))
    y = (rng.random(n) < 0.5).astype(np.uint8)
    return X, y


def tree_signature(root):
    records = []
    stack = [root]
    while stack:
        node = stack.pop()
        if isinstance(node, Internal):
            records.append(("I", node.feature_index, node.threshold))
            stack.append(node.right)
            stack.append(node.left)
        else:
            records.append(("L", node.count_above, node.count_below))
    return records


def test_gini():
    assert gini(10, 0) == 0.0
    assert gini(5, 5) == 0.5
    assert gini(3, 1) == pytest.approx(0.375)
    with pytest.raises(ValueError):
        gini(0, 0)


def test_best_split_separable():
    X, y = separable_dataset()
    assert best_split(X, y, range(13), 10) == (0, 0.5, 0.5)


def test_best_split_degenerate_cases():
    X = np.full((30, 13), 0.7)
    y = np.array([Label.ABOVE] * 15 + [Label.BELOW] * 15, dtype=np.uint8)
    assert best_split(X, y, range(13), 1) is None  # identical feature vectors

    X, _ = separable_dataset()
    pure = np.full(40, Label.BELOW, dtype=np.uint8)
    assert best_split(X, pure, range(13), 1) is None  # no impurity to reduce


def test_best_split_respects_min_samples_leaf():
    X = np.zeros((10, 2))
    X[:, 0] = np.arange(10)
    y = np.array([Label.ABOVE] * 9 + [Label.BELOW], dtype=np.uint8)
    # the only impurity-reducing split would isolate 1 sample
    assert best_split(X, y, [0, 1], 4) is not None
    result = best_split(X, y, [0, 1], 4)
    assert 4 <= result[1] <= 6  # threshold away from the edges
    assert best_split(X, y, [0, 1], 6) is None


def test_best_split_matches_brute_force():
    rng = np.random.default_rng(8)
    grid = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    for trial in range(50):
        n = int(rng.integers(4, 51))
        X = grid[rng.integers(0, grid.size, size=(n, 2))]
        y = (rng.random(n) < 0.5).astype(np.uint8)
        min_leaf = int(rng.integers(1, 8))
        fast = best_split(X, y, [0, 1], min_leaf)
        slow = brute_force_best_split(X, y, [0, 1], min_leaf)
        if slow is None:
            assert fast is None
        else:
            assert fast is not None
            assert fast[0] == slow[0]
            assert fast[1] == slow[1]
            assert fast[2] == pytest.approx(slow[2], abs=1e-12)


def test_train_tree_pure_labels_gives_single_leaf():
    X = np.zeros((20, 13))
    y = np.full(20, Label.BELOW, dtype=np.uint8)
    root = train_tree(X, y, ForestParams(min_samples_leaf=5), np.random.default_rng(0))
    assert isinstance(root, Leaf)
    assert (root.count_above, root.count_below) == (0, 20)


def test_train_tree_separable_structure():
    X, y = separable_dataset()
    params = ForestParams(min_samples_leaf=5, features_per_split=13, seed=1)
    root = train_tree(X, y, params, np.random.default_rng(1))
    assert isinstance(root, Internal)
    assert root.feature_index == 0
    assert root.threshold == 0.5
    assert isinstance(root.left, Leaf) and isinstance(root.right, Leaf)
    assert root.left.count_below == 0 and root.right.count_above == 0
    assert root.left.count_above + root.right.count_below == 40  # bootstrap size


def test_training_is_deterministic():
    rng = np.random.default_rng(9)
    X, y = random_dataset(rng)
    params = ForestParams(n_trees=4, min_samples_leaf=5, seed=21)
    a = train_forest(X, y, params)
    b = train_forest(X, y, params)
    for ta, tb in zip(a.trees, b.trees):
        assert tree_signature(ta) == tree_signature(tb)


def test_different_seeds_give_different_forests():
    rng = np.random.default_rng(10)
    X, y = random_dataset(rng)
    a = train_forest(X, y, ForestParams(n_trees=3, min_samples_leaf=5, seed=1))
    b = train_forest(X, y, ForestParams(n_trees=3, min_samples_leaf=5, seed=2))
    sig = lambda m: [tree_signature(t) for t in m.trees]
    assert sig(a) != sig(b)


def test_forest_has_requested_tree_count_and_leaf_sizes():
    rng = np.random.default_rng(11)
    X, y = random_dataset(rng, n=200)
    params = ForestParams(n_trees=20, min_samples_leaf=10, seed=3)
    model = train_forest(X, y, params)
    assert len(model.trees) == 20
    for root in model.trees:
        for leaf in iter_leaves(root):
            assert leaf.count_above + leaf.count_below >= 10


def test_predict_single_tree_and_mean():
    one = RandomForestModel(ForestParams(n_trees=1), [Leaf(3, 7)])
    assert predict_p_below(one, np.zeros(13)) == pytest.approx(0.7)
    two = RandomForestModel(ForestParams(n_trees=2), [Leaf(4, 6), Leaf(2, 8)])
    assert predict_p_below(two, np.zeros(13)) == pytest.approx(0.7)


def test_predict_in_unit_interval_and_order_invariant():
    rng = np.random.default_rng(12)
    X, y = random_dataset(rng, n=150)
    model = train_forest(X, y, ForestParams(n_trees=6, min_samples_leaf=5, seed=4))
    queries = rng.normal(size=(50, 13))
    p = predict_p_below_batch(model, queries)
    assert np.all((p >= 0) & (p <= 1))
    reordered = RandomForestModel(model.params, list(reversed(model.trees)))
    assert predict_p_below_batch(reordered, queries) == pytest.approx(p, abs=1e-12)


def test_batch_prediction_matches_scalar_exactly():
    rng = np.random.default_rng(13)
    X, y = random_dataset(rng, n=150)
    model = train_forest(X, y, ForestParams(n_trees=5, min_samples_leaf=5, seed=5))
    queries = rng.normal(size=(40, 13))
    batch = predict_p_below_batch(model, queries)
    for i in range(queries.shape[0]):
        assert predict_p_below(model, queries[i]) == batch[i]


def test_separable_clusters_train_to_perfect_accuracy():
    rng = np.random.default_rng(14)
    n = 200
    X = rng.normal(scale=0.05, size=(n, 13))
    X[n // 2:, :] += 1.0  # margin 10x the noise scale
    y = np.array([Label.ABOVE] * (n // 2) + [Label.BELOW] * (n // 2), dtype=np.uint8)
    model = train_forest(X, y, ForestParams(n_trees=5, min_samples_leaf=5, seed=6))
    predicted = predict_p_below_batch(model, X) >= 0.5
    assert np.array_equal(predicted, y == Label.BELOW)


def test_binary_entropy_values():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    expected = -0.9 * math.log2(0.9) - 0.1 * math.log2(0.1)
    assert binary_entropy(0.9) == pytest.approx(expected, abs=1e-12)
    assert binary_entropy(0.9) == pytest.approx(0.46899, abs=1e-5)


def test_binary_entropy_symmetry_and_errors():
    rng = np.random.default_rng(15)
    p = rng.uniform(0, 1, 100)
    assert binary_entropy(p) == pytest.approx(binary_entropy(1.0 - p), abs=1e-12)
    for bad in (-0.01, 1.01):
        with pytest.raises(ValueError):
            binary_entropy(bad)


def test_forest_params_validation():
    with pytest.raises(ValueError):
        ForestParams(n_trees=0)
    with pytest.raises(ValueError):
        ForestParams(min_samples_leaf=0)
    with pytest.raises(ValueError):
        ForestParams(features_per_split=14)
    with pytest.raises(ValueError):
        ForestParams(seed=-1)
    with pytest.raises(ValueError):
        train_tree(np.zeros((3, 13)), np.zeros(3, dtype=np.uint8),
                   ForestParams(min_samples_leaf=10), np.random.default_rng(0))
