"""Gaussian naive Bayes, L2 logistic regression and k-nearest neighbours."""
from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import KTooLarge
from .base import Classifier, sigmoid


class GaussianNB(Classifier):
    algorithm = "NaiveBayes"

    def _fit(self, X, y):
        eps = self.params["var_smoothing"] * float(np.var(X, axis=0).max())
        self.priors_ = np.array([np.mean(y == c) for c in (0, 1)])
        self.means_ = np.array([X[y == c].mean(axis=0) for c in (0, 1)])
        self.vars_ = np.array([X[y == c].var(axis=0) for c in (0, 1)]) + eps
        if np.any(self.vars_ <= 0):
            # all features constant within a class and across the data
            self.vars_ = np.where(self.vars_ <= 0, 1e-300, self.vars_)

    def joint_log_likelihood(self, X):
        out = np.empty((X.shape[0], 2))
        for c in (0, 1):
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * self.vars_[c]))
            ll = ll - 0.5 * np.sum((X - self.means_[c]) ** 2 / self.vars_[c], axis=1)
            out[:, c] = np.log(self.priors_[c]) + ll
        return out

    def _score(self, X):
        jll = self.joint_log_likelihood(X)
        # P(1|x) = sigmoid(log p1 - log p0)
        return sigmoid(jll[:, 1] - jll[:, 0])


def logistic_loss_and_grad(w, b, X, y, C):
    """Mean cross-entropy plus (1/C) * 0.5 * ||w||^2 and its gradient.

    Returns ``(loss, grad_w, grad_b)``; the bias is not penalised.
    """
    z = X @ w + b
    # log(1 + e^z) - y z, computed stably
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z)) + 0.5 * float(w @ w) / C
    r = (sigmoid(z) - y) / X.shape[0]
    return loss, X.T @ r + w / C, float(r.sum())


class LogisticRegression(Classifier):
    """Full-batch gradient descent with step 1/L (L a Lipschitz bound of the gradient)."""

    algorithm = "LogisticRegression"

    def _fit(self, X, y):
        C = self.params["C"]
        n = X.shape[0]
        Xa = np.hstack([X, np.ones((n, 1))])
        L = 0.25 * np.linalg.eigvalsh(Xa.T @ Xa / n).max() + 1.0 / C
        w, b, n_iter, converged, losses = kernels.logistic_gd(
            X, y.astype(np.float64), float(C), 1.0 / L,
            float(self.params["tol"]), int(self.params["max_iter"]), 100,
        )
        self.coef_ = np.asarray(w)
        self.intercept_ = float(b)
        self.n_iter_ = int(n_iter)
        self.converged_ = bool(converged)
        self.loss_history_ = list(losses)

    def decision_function(self, X):
        X = self._check_X(X)
        return X @ self.coef_ + self.intercept_

    def _score(self, X):
        return sigmoid(X @ self.coef_ + self.intercept_)


class KNN(Classifier):
    """Majority vote of the k Euclidean-nearest training points.

    The score is the positive-vote fraction. An exact tie is nudged by
    1/(4k) toward the label of the single nearest neighbour, which keeps
    the ``score >= 0.5`` rule consistent with the tie rule without
    reordering scores that are not tied. Equidistant neighbours are
    ranked by training-row index.
    """

    algorithm = "KNN"
    requires_both_classes = False

    def _fit(self, X, y):
        k = self.params["n_neighbors"]
        if k > X.shape[0]:
            raise KTooLarge(f"k={k} exceeds the {X.shape[0]} training samples")
        self.X_ = X.copy()
        self.y_ = y.copy()

    def kneighbors(self, X):
        """Indices and distances of the k nearest training rows, nearest first."""
        return self._neighbors(self._check_X(X))

    def _neighbors(self, X):
        diff = X[:, None, :] - self.X_[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        order = np.argsort(d2, axis=1, kind="stable")[:, : self.params["n_neighbors"]]
        return order, np.sqrt(np.take_along_axis(d2, order, axis=1))

    def _score(self, X):
        idx, _ = self._neighbors(X)
        k = idx.shape[1]
        votes = self.y_[idx]
        score = votes.mean(axis=1)
        tie = 2 * votes.sum(axis=1) == k
        nearest = votes[:, 0]
        nudge = np.where(nearest == 1, 1.0, -1.0) / (4.0 * k)
        return np.where(tie, 0.5 + nudge, score)
