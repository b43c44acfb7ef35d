"""Binary random forest built from scratch: bootstrap sampling, Gini splits,
leaf class counts, averaged leaf-fraction probabilities, and binary entropy.

Samples are parallel arrays: X of shape (n, n_features) and y of Label values
(ABOVE/BELOW).  Everything is deterministic: tree i draws all of its
randomness from a stream derived from (seed, i), so results do not depend on
execution order.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Label

# stream tag for per-tree generators; distinct from the pipeline's split (0)
# and labeling (1) tags so one base seed can drive the whole pipeline
_STREAM_TREE = 2


@dataclass
class Leaf:
    count_above: int
    count_below: int

    @property
    def p_below(self) -> float:
        return self.count_below / (self.count_above + self.count_below)


@dataclass
class Internal:
    feature_index: int
    threshold: float
    left: "Leaf | Internal | None" = None
    right: "Leaf | Internal | None" = None


TreeNode = Leaf | Internal


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 20
    min_samples_leaf: int = 10
    features_per_split: int = 4  # ceil(sqrt(13))
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if not 1 <= self.features_per_split <= 13:
            raise ValueError("features_per_split must be in 1..13")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(eq=False)
class RandomForestModel:
    params: ForestParams
    trees: list
    entropy_threshold: float = 0.0
    _flat: "list[_FlatTree] | None" = field(default=None, repr=False, compare=False)

    def flat_trees(self) -> "list[_FlatTree]":
        if self._flat is None:
            self._flat = [_FlatTree.from_root(root) for root in self.trees]
        return self._flat


def gini(count_above: int, count_below: int) -> float:
    """Binary Gini impurity 2 p (1 - p) with p the Above fraction."""
    total = count_above + count_below
    if total == 0:
        raise ValueError("gini of an empty node is undefined")
    p = count_above / total
    return 2.0 * p * (1.0 - p)


def best_split(X, y, candidate_features, min_samples_leaf: int):
    """Best (feature_index, threshold, gain) over the candidate features.

    Thresholds are midpoints between consecutive distinct values of a feature;
    the winner maximizes the Gini impurity decrease subject to both children
    holding at least min_samples_leaf samples.  Ties break toward the lowest
    feature index, then the lowest threshold.  Returns None when no split
    with strictly positive gain exists.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    n = y.size
    if n == 0:
        raise ValueError("best_split needs at least one sample")
    above_total = int(np.count_nonzero(y == Label.ABOVE))
    if above_total == 0 or above_total == n or n < 2 * min_samples_leaf:
        return None
    parent = gini(above_total, n - above_total)

    best_gain = 0.0
    best = None
    for f in sorted(set(int(c) for c in candidate_features)):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        above = (y[order] == Label.ABOVE)
        # left child = first j sorted samples, for j = 1 .. n-1
        j = np.arange(1, n)
        valid = xs[1:] > xs[:-1]
        valid &= (j >= min_samples_leaf) & (n - j >= min_samples_leaf)
        if not valid.any():
            continue
        al = np.cumsum(above)[:-1]
        nl = j
        nr = n - j
        ar = above_total - al
        pl = al / nl
        pr = ar / nr
        gl = 2.0 * pl * (1.0 - pl)
        gr = 2.0 * pr * (1.0 - pr)
        gain = parent - nl / n * gl - nr / n * gr
        gain[~valid] = -np.inf
        jbest = int(np.argmax(gain))  # first max = lowest threshold
        if gain[jbest] > best_gain:
            best_gain = float(gain[jbest])
            best = (f, float((xs[jbest] + xs[jbest + 1]) / 2.0), best_gain)
    return best


def train_tree(X, y, params: ForestParams, rng: np.random.Generator) -> TreeNode:
    """Grow one tree from a bootstrap of (X, y).

    Nodes are processed depth-first, left child first; at every node the rng
    supplies features_per_split distinct candidate features before best_split
    decides.  Fully determined by (X, y, params, rng state).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    n, n_features = X.shape
    if n < params.min_samples_leaf:
        raise ValueError(
            f"need at least min_samples_leaf={params.min_samples_leaf} samples, got {n}")
    if params.features_per_split > n_features:
        raise ValueError("features_per_split exceeds the number of features")

    boot = rng.integers(0, n, size=n)
    Xb = X[boot]
    yb = y[boot]

    root = None
    # stack of (sample indices, parent node, side); right pushed first so the
    # left child is processed next, keeping rng draws in preorder
    stack = [(np.arange(n), None, "")]
    while stack:
        idx, parent, side = stack.pop()
        labels = yb[idx]
        count_above = int(np.count_nonzero(labels == Label.ABOVE))
        count_below = idx.size - count_above
        candidates = rng.choice(n_features, size=params.features_per_split,
                                replace=False)
        split = best_split(Xb[idx], labels, candidates, params.min_samples_leaf)
        if split is None:
            node = Leaf(count_above, count_below)
        else:
            feature_index, threshold, _ = split
            node = Internal(feature_index, threshold)
            go_left = Xb[idx, feature_index] < threshold
            stack.append((idx[~go_left], node, "right"))
            stack.append((idx[go_left], node, "left"))
        if parent is None:
            root = node
        elif side == "left":
            parent.left = node
        else:
            parent.right = node
    return root


def train_forest(X, y, params: ForestParams) -> RandomForestModel:
    """Train params.n_trees trees, each from its own (seed, index) stream."""
    trees = []
    for i in range(params.n_trees):
        rng = np.random.default_rng([params.seed, _STREAM_TREE, i])
        trees.append(train_tree(X, y, params, rng))
    return RandomForestModel(params=params, trees=trees)


def predict_p_below(model: RandomForestModel, features) -> float:
    """Probability of the Below class: mean of leaf below-fractions over trees."""
    x = np.asarray(features, dtype=float)
    total = 0.0
    for root in model.trees:
        node = root
        while isinstance(node, Internal):
            node = node.left if x[node.feature_index] < node.threshold else node.right
        total += node.count_below / (node.count_above + node.count_below)
    return total / len(model.trees)


def predict_p_below_batch(model: RandomForestModel, X) -> np.ndarray:
    """predict_p_below for every row of X, vectorized through flat trees."""
    X = np.asarray(X, dtype=float)
    acc = np.zeros(X.shape[0])
    for flat in model.flat_trees():
        acc += flat.predict(X)
    return acc / len(model.trees)


def binary_entropy(p):
    """Base-2 entropy of a Bernoulli(p) distribution, in [0, 1]; 0 log 0 = 0.

    Accepts scalars or arrays; raises for values outside [0, 1].
    """
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("probability outside [0, 1]")
    out = np.zeros_like(arr)
    interior = (arr > 0.0) & (arr < 1.0)
    q = arr[interior]
    out[interior] = -q * np.log2(q) - (1.0 - q) * np.log2(1.0 - q)
    if arr.ndim == 0:
        return float(out)
    return out


def iter_leaves(root: TreeNode):
    """All leaves of a tree (iterative; trees can outgrow the recursion limit)."""
    stack = [root]
    while stack:
        node = stack.pop()
        if isinstance(node, Internal):
            stack.append(node.right)
            stack.append(node.left)
        else:
            yield node


class _FlatTree:
    """Array form of one tree for batch routing: leaves have left == -1."""

    __slots__ = ("feature", "threshold", "left", "right", "p_below")

    def __init__(self, feature, threshold, left, right, p_below):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.p_below = p_below

    @classmethod
    def from_root(cls, root: TreeNode) -> "_FlatTree":
        feature, threshold, left, right, p_below = [], [], [], [], []

        def append(node):
            feature.append(node.feature_index if isinstance(node, Internal) else 0)
            threshold.append(node.threshold if isinstance(node, Internal) else 0.0)
            left.append(-1)
            right.append(-1)
            p_below.append(0.0 if isinstance(node, Internal) else node.p_below)
            return len(feature) - 1

        # preorder with an explicit stack of (node, parent slot, side)
        stack = [(root, -1, "")]
        while stack:
            node, parent_i, side = stack.pop()
            i = append(node)
            if parent_i >= 0:
                if side == "left":
                    left[parent_i] = i
                else:
                    right[parent_i] = i
            if isinstance(node, Internal):
                stack.append((node.right, i, "right"))
                stack.append((node.left, i, "left"))
        return cls(np.array(feature, dtype=np.int32),
                   np.array(threshold),
                   np.array(left, dtype=np.int32),
                   np.array(right, dtype=np.int32),
                   np.array(p_below))

    def predict(self, X: np.ndarray) -> np.ndarray:
        n = X.shape[0]
        out = np.empty(n)
        node = np.zeros(n, dtype=np.int32)
        active = np.arange(n)
        while active.size:
            nd = node[active]
            at_leaf = self.left[nd] < 0
            if at_leaf.any():
                done = active[at_leaf]
                out[done] = self.p_below[node[done]]
                active = active[~at_leaf]
                nd = nd[~at_leaf]
                if active.size == 0:
                    break
            go_left = X[active, self.feature[nd]] < self.threshold[nd]
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
        return out
