"""Decision tree, random forest and extra-trees classifiers.

All three share one tree grower. Best-threshold search runs in the
compiled kernel when available (see ``maskratio.kernels``).
"""
from __future__ import annotations

import math

import numpy as np

from .. import kernels
from .base import Classifier

_CRITERIA = {"gini": kernels.GINI, "entropy": kernels.ENTROPY}
_MIN_DECREASE = 1e-12


def impurity(n, n1, criterion):
    """Gini impurity or entropy (bits) of a node with ``n1`` positives out of ``n``."""
    if n == 0:
        return 0.0
    p = n1 / n
    q = 1.0 - p
    if criterion == "gini":
        return 1.0 - p * p - q * q
    out = 0.0
    for v in (p, q):
        if v > 0:
            out -= v * math.log2(v)
    return out


class Tree:
    """Flat array form of a fitted binary tree.

    ``feature[i] < 0`` marks a leaf. Samples with ``x[feature] <= threshold``
    go left. ``value`` holds the positive-class frequency for classification
    trees and the leaf weight for boosting trees.
    """

    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []
        self.n_node = []
        self.n_pos = []
        self.decrease = []
        self.depth = []

    def _add(self, value, n, n_pos, depth):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        self.n_node.append(n)
        self.n_pos.append(n_pos)
        self.decrease.append(0.0)
        self.depth.append(depth)
        return len(self.feature) - 1

    def finalize(self):
        for name in ("feature", "left", "right", "n_node", "n_pos", "depth"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        for name in ("threshold", "value", "decrease"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        return self

    @property
    def node_count(self):
        return len(self.feature)

    @property
    def max_depth(self):
        return int(self.depth.max())

    def apply(self, X):
        """Leaf index for each row of X."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            internal = f >= 0
            if not internal.any():
                return node
            go_left = X[rows, np.where(internal, f, 0)] <= self.threshold[node]
            node = np.where(internal, np.where(go_left, self.left[node], self.right[node]), node)

    def predict_value(self, X):
        return self.value[self.apply(X)]


def _resolve_max_features(max_features, n_features):
    if max_features is None or max_features == "all":
        return n_features
    if max_features == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    return min(int(max_features), n_features)


def _sorted_order(X, features):
    return np.ascontiguousarray(np.argsort(X[:, features], axis=0, kind="stable"), dtype=np.int64)


def grow_class_tree(
    X,
    y,
    *,
    criterion="gini",
    max_depth=None,
    min_samples_split=2,
    min_samples_leaf=1,
    max_features=None,
    splitter="best",
    rng=None,
):
    """Grow a classification tree depth-first; returns a :class:`Tree`."""
    n_features = X.shape[1]
    k = _resolve_max_features(max_features, n_features)
    crit_code = _CRITERIA[criterion]
    tree = Tree()
    # (row indices, depth, parent, is_left)
    stack = [(np.arange(X.shape[0]), 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        yn = y[idx]
        n = idx.size
        n1 = int(yn.sum())
        node = tree._add(n1 / n, n, n1, depth)
        if parent >= 0:
            if is_left:
                tree.left[parent] = node
            else:
                tree.right[parent] = node
        if (
            (max_depth is not None and depth >= max_depth)
            or n < min_samples_split
            or n < 2 * min_samples_leaf
            or n1 == 0
            or n1 == n
        ):
            continue
        if k < n_features:
            features = np.sort(rng.choice(n_features, size=k, replace=False)).astype(np.int64)
        else:
            features = np.arange(n_features, dtype=np.int64)
        Xn = np.ascontiguousarray(X[idx])
        if splitter == "best":
            f, thr, cost = kernels.best_class_split(
                Xn, _sorted_order(Xn, features), np.ascontiguousarray(yn), features,
                crit_code, min_samples_leaf,
            )
        else:
            f, thr, cost = _random_split(Xn, yn, features, criterion, min_samples_leaf, rng)
        if f < 0:
            continue
        decrease = n * impurity(n, n1, criterion) - cost
        if decrease <= _MIN_DECREASE:
            continue
        tree.feature[node] = f
        tree.threshold[node] = thr
        tree.decrease[node] = decrease / n
        go_left = Xn[:, f] <= thr
        # right child pushed first so the left subtree is numbered first
        stack.append((idx[~go_left], depth + 1, node, False))
        stack.append((idx[go_left], depth + 1, node, True))
    return tree.finalize()


def _random_split(X, y, features, criterion, min_samples_leaf, rng):
    """Extremely randomised split: one uniform threshold per candidate feature."""
    n = X.shape[0]
    total1 = int(y.sum())
    best = (-1, 0.0, 0.0)
    for f in features:
        col = X[:, f]
        lo, hi = float(col.min()), float(col.max())
        if not lo < hi:
            continue
        thr = float(rng.uniform(lo, hi))
        left = col <= thr
        nl = int(left.sum())
        nr = n - nl
        if nl < min_samples_leaf or nr < min_samples_leaf:
            continue
        l1 = int(y[left].sum())
        cost = nl * impurity(nl, l1, criterion) + nr * impurity(nr, total1 - l1, criterion)
        if best[0] < 0 or cost < best[2]:
            best = (int(f), thr, cost)
    return best


def tree_rng(seed, index):
    """Independent random stream for ensemble member ``index``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


class DecisionTree(Classifier):
    algorithm = "DecisionTree"
    requires_both_classes = False

    def _fit(self, X, y):
        p = self.params
        self.tree_ = grow_class_tree(
            X, y,
            criterion=p["criterion"],
            max_depth=p["max_depth"],
            min_samples_split=p["min_samples_split"],
            min_samples_leaf=p["min_samples_leaf"],
        )

    def _score(self, X):
        return self.tree_.predict_value(X)


class RandomForest(Classifier):
    algorithm = "RandomForest"
    requires_both_classes = False

    def _fit(self, X, y):
        p = self.params
        n = X.shape[0]
        self.trees_ = []
        for i in range(p["n_estimators"]):
            rng = tree_rng(self.spec.seed, i)
            idx = rng.integers(0, n, size=n) if p["bootstrap"] else np.arange(n)
            self.trees_.append(
                grow_class_tree(
                    X[idx], y[idx],
                    criterion=p["criterion"],
                    max_depth=p["max_depth"],
                    min_samples_split=p["min_samples_split"],
                    min_samples_leaf=p["min_samples_leaf"],
                    max_features=p["max_features"],
                    rng=rng,
                )
            )

    def _score(self, X):
        return np.mean([t.predict_value(X) for t in self.trees_], axis=0)


class ExtraTrees(Classifier):
    algorithm = "ExtraTrees"
    requires_both_classes = False

    def _fit(self, X, y):
        p = self.params
        self.trees_ = [
            grow_class_tree(
                X, y,
                criterion=p["criterion"],
                max_depth=p["max_depth"],
                min_samples_split=p["min_samples_split"],
                min_samples_leaf=p["min_samples_leaf"],
                max_features=p["max_features"],
                splitter="random",
                rng=tree_rng(self.spec.seed, i),
            )
            for i in range(p["n_estimators"])
        ]

    def _score(self, X):
        return np.mean([t.predict_value(X) for t in self.trees_], axis=0)
