"""Gradient-boosted regression trees on the logistic loss (second-order splits)."""
from __future__ import annotations

import numpy as np

from .. import kernels
from .base import Classifier, logit, sigmoid
from .trees import Tree, _sorted_order, tree_rng

_RATE_CLIP = 1e-6


def split_gain(G_left, H_left, G_right, H_right, reg_lambda=1.0, gamma=0.0):
    """Loss reduction of a split, net of the ``gamma`` penalty."""
    G = G_left + G_right
    H = H_left + H_right
    return 0.5 * (
        G_left**2 / (H_left + reg_lambda)
        + G_right**2 / (H_right + reg_lambda)
        - G**2 / (H + reg_lambda)
    ) - gamma


def leaf_weight(G, H, reg_lambda=1.0, learning_rate=1.0):
    return -G / (H + reg_lambda) * learning_rate


def grow_gradient_tree(X, grad, hess, features, *, max_depth, gamma, reg_lambda, learning_rate):
    """Exact greedy tree on gradient/hessian statistics.

    A split is kept only if its gain after subtracting ``gamma`` is positive.
    Leaf values are already multiplied by the learning rate.
    """
    tree = Tree()
    stack = [(np.arange(X.shape[0]), 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        g = grad[idx]
        h = hess[idx]
        G = float(g.sum())
        H = float(h.sum())
        node = tree._add(leaf_weight(G, H, reg_lambda, learning_rate), idx.size, 0, depth)
        if parent >= 0:
            if is_left:
                tree.left[parent] = node
            else:
                tree.right[parent] = node
        if depth >= max_depth or idx.size < 2:
            continue
        Xn = np.ascontiguousarray(X[idx])
        f, thr, gain = kernels.best_gradient_split(
            Xn, _sorted_order(Xn, features), np.ascontiguousarray(g), np.ascontiguousarray(h),
            features, reg_lambda,
        )
        if f < 0 or gain - gamma <= 0:
            continue
        tree.feature[node] = f
        tree.threshold[node] = thr
        tree.decrease[node] = gain - gamma
        go_left = Xn[:, f] <= thr
        stack.append((idx[~go_left], depth + 1, node, False))
        stack.append((idx[go_left], depth + 1, node, True))
    return tree.finalize()


class GradientBoosting(Classifier):
    """Additive tree ensemble; score = sigmoid(base logit + sum of leaf weights).

    Rounds whose tree keeps no split are dropped, so a gamma that forbids
    every split leaves the constant base score (the training positive rate).
    """

    algorithm = "GradientBoosting"
    requires_both_classes = False

    def _fit(self, X, y):
        p = self.params
        n, d = X.shape
        rate = float(np.clip(y.mean(), _RATE_CLIP, 1 - _RATE_CLIP))
        self.base_score_ = logit(rate)
        raw = np.full(n, self.base_score_)
        n_rows = max(1, int(round(p["subsample"] * n)))
        n_cols = max(1, int(round(p["colsample_bytree"] * d)))
        self.trees_ = []
        for i in range(p["n_estimators"]):
            rng = tree_rng(self.spec.seed, i)
            rows = np.sort(rng.choice(n, size=n_rows, replace=False)) if n_rows < n else np.arange(n)
            cols = np.sort(rng.choice(d, size=n_cols, replace=False)) if n_cols < d else np.arange(d)
            prob = sigmoid(raw[rows])
            grad = prob - y[rows]
            hess = prob * (1.0 - prob)
            tree = grow_gradient_tree(
                X[rows], grad, hess, cols.astype(np.int64),
                max_depth=p["max_depth"],
                gamma=p["gamma"],
                reg_lambda=p["reg_lambda"],
                learning_rate=p["learning_rate"],
            )
            if tree.node_count == 1:
                # gamma rejected every split; a lone subsample-fitted leaf would only add noise
                continue
            self.trees_.append(tree)
            raw += tree.predict_value(X)

    def decision_function(self, X):
        X = self._check_X(X)
        raw = np.full(X.shape[0], self.base_score_)
        for t in self.trees_:
            raw += t.predict_value(X)
        return raw

    def _score(self, X):
        return sigmoid(self.decision_function(X))
