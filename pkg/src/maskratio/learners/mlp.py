"""One-output ReLU network trained full-batch on mean cross-entropy."""
from __future__ import annotations

import numpy as np

from .base import Classifier, sigmoid

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


def init_params(layer_sizes, rng):
    """Glorot-uniform weights, zero biases: ``[(W, b), ...]``."""
    params = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params.append((rng.uniform(-limit, limit, size=(fan_in, fan_out)), np.zeros(fan_out)))
    return params


def forward(params, X):
    """Returns the output logits and the per-layer cache for backprop."""
    acts = [X]
    pre = []
    a = X
    for W, b in params[:-1]:
        z = a @ W + b
        pre.append(z)
        a = np.maximum(z, 0.0)
        acts.append(a)
    W, b = params[-1]
    return (a @ W + b)[:, 0], (acts, pre)


def loss_and_grads(params, X, y):
    """Mean binary cross-entropy and its gradient for each (W, b)."""
    logits, (acts, pre) = forward(params, X)
    loss = float(np.mean(np.logaddexp(0.0, logits) - y * logits))
    delta = ((sigmoid(logits) - y) / X.shape[0])[:, None]
    grads = [None] * len(params)
    for layer in range(len(params) - 1, -1, -1):
        W, _ = params[layer]
        grads[layer] = (acts[layer].T @ delta, delta.sum(axis=0))
        if layer > 0:
            delta = (delta @ W.T) * (pre[layer - 1] > 0)
    return loss, grads


def flatten(params):
    return np.concatenate([np.concatenate([W.ravel(), b]) for W, b in params])


def unflatten(vector, like):
    out = []
    pos = 0
    for W, b in like:
        nw = W.size
        out.append((vector[pos : pos + nw].reshape(W.shape), vector[pos + nw : pos + nw + b.size].copy()))
        pos += nw + b.size
    return out


class Mlp(Classifier):
    """``layers`` hidden ReLU layers of ``hidden`` units and a sigmoid output.

    Trains for exactly ``epochs`` full-batch steps. If a step would raise the
    loss it is rejected and the learning rate halved, so ``loss_history_``
    is non-increasing.
    """

    algorithm = "Mlp"
    requires_both_classes = False

    def _fit(self, X, y):
        p = self.params
        rng = np.random.default_rng(self.spec.seed)
        sizes = [X.shape[1]] + [p["hidden"]] * p["layers"] + [1]
        params = init_params(sizes, rng)
        self.init_params_ = [(W.copy(), b.copy()) for W, b in params]
        yf = y.astype(np.float64)
        lr = float(p["learning_rate"])
        theta = flatten(params)
        m = np.zeros_like(theta)
        v = np.zeros_like(theta)
        t = 0
        loss, grads = loss_and_grads(params, X, yf)
        self.loss_history_ = [loss]
        self.lr_history_ = [lr]
        for _ in range(p["epochs"]):
            g = flatten(grads)
            if p["optimizer"] == "adam":
                t_new = t + 1
                m_new = _ADAM_BETA1 * m + (1 - _ADAM_BETA1) * g
                v_new = _ADAM_BETA2 * v + (1 - _ADAM_BETA2) * g * g
                m_hat = m_new / (1 - _ADAM_BETA1**t_new)
                v_hat = v_new / (1 - _ADAM_BETA2**t_new)
                cand = theta - lr * m_hat / (np.sqrt(v_hat) + _ADAM_EPS)
            else:
                cand = theta - lr * g
            cand_params = unflatten(cand, params)
            cand_loss, cand_grads = loss_and_grads(cand_params, X, yf)
            if cand_loss > loss:
                lr *= 0.5
            else:
                theta, params, loss, grads = cand, cand_params, cand_loss, cand_grads
                if p["optimizer"] == "adam":
                    t, m, v = t_new, m_new, v_new
            self.loss_history_.append(loss)
            self.lr_history_.append(lr)
        self.params_ = params

    def decision_function(self, X):
        return forward(self.params_, self._check_X(X))[0]

    def _score(self, X):
        return sigmoid(forward(self.params_, X)[0])
