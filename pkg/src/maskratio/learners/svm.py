"""Soft-margin SVM with an RBF kernel, trained by SMO."""
from __future__ import annotations

import warnings

import numpy as np

from .. import kernels
from .base import Classifier, sigmoid


class ConvergenceWarning(UserWarning):
    pass


def variance_gamma(X):
    """1 / (n_features * mean per-feature variance); 1.0 for constant data."""
    v = float(np.mean(np.var(X, axis=0)))
    return 1.0 / (X.shape[1] * v) if v > 0 else 1.0


def rbf_kernel(A, B, gamma):
    d2 = (
        np.sum(A**2, axis=1)[:, None]
        - 2.0 * A @ B.T
        + np.sum(B**2, axis=1)[None, :]
    )
    return np.exp(-gamma * np.maximum(d2, 0.0))


class SvmRbf(Classifier):
    """Decision value f(x) = sum_i alpha_i y_i K(x_i, x) + b, with y in {-1, +1}.

    ``predict_score`` is sigmoid(f(x)); it ranks samples but is not a
    calibrated probability.
    """

    algorithm = "SvmRbf"

    def _fit(self, X, y):
        p = self.params
        self.gamma_ = variance_gamma(X) if p["gamma"] == "variance" else float(p["gamma"])
        ys = np.where(y == 1, 1.0, -1.0)
        K = np.ascontiguousarray(rbf_kernel(X, X, self.gamma_))
        alpha, b, n_iter, converged = kernels.smo(K, ys, float(p["C"]), float(p["tol"]), int(p["max_iter"]))
        self.alpha_ = np.asarray(alpha)
        self.intercept_ = float(b)
        self.n_iter_ = int(n_iter)
        self.converged_ = bool(converged)
        if not converged:
            warnings.warn(
                f"SMO stopped after {n_iter} iterations without reaching tol={p['tol']}",
                ConvergenceWarning,
                stacklevel=3,
            )
        sv = self.alpha_ > 0
        self.support_ = np.flatnonzero(sv)
        self.support_vectors_ = X[sv]
        self.dual_coef_ = self.alpha_[sv] * ys[sv]
        self.y_signed_ = ys

    def decision_function(self, X):
        return self._decision(self._check_X(X))

    def _decision(self, X):
        if self.support_.size == 0:
            return np.full(X.shape[0], self.intercept_)
        return rbf_kernel(X, self.support_vectors_, self.gamma_) @ self.dual_coef_ + self.intercept_

    def _score(self, X):
        return sigmoid(self._decision(X))
