"""Pure-Python/numpy twins of the compiled kernels in ``_kernels.pyx``.

Signatures, return values and tie-breaking match the compiled versions.
"""
import numpy as np

GINI = 0
ENTROPY = 1


def _impurity(n, n1, criterion):
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n > 0, n1 / np.where(n > 0, n, 1.0), 0.0)
        q = 1.0 - p
        if criterion == GINI:
            out = 1.0 - p * p - q * q
        else:
            out = -np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
            out = out - np.where(q > 0, q * np.log2(np.where(q > 0, q, 1.0)), 0.0)
    return np.where(n > 0, out, 0.0)


def _midpoint(xa, xb):
    thr = 0.5 * (xa + xb)
    return xa if thr >= xb else thr


def best_class_split(X, order, y, features, criterion, min_samples_leaf):
    n = X.shape[0]
    best_f, best_thr, best_cost = -1, 0.0, 0.0
    if n < 2:
        return best_f, best_thr, best_cost
    total1 = float(y.sum())
    nl = np.arange(1, n, dtype=float)
    nr = n - nl
    leaf_ok = (nl >= min_samples_leaf) & (nr >= min_samples_leaf)
    for j, f in enumerate(features):
        o = order[:, j]
        xs = X[o, f]
        left1 = np.cumsum(y[o][:-1]).astype(float)
        valid = leaf_ok & (xs[:-1] < xs[1:])
        if not valid.any():
            continue
        cost = nl * _impurity(nl, left1, criterion) + nr * _impurity(nr, total1 - left1, criterion)
        cost = np.where(valid, cost, np.inf)
        i = int(np.argmin(cost))
        if best_f < 0 or cost[i] < best_cost:
            best_f, best_thr, best_cost = int(f), _midpoint(xs[i], xs[i + 1]), float(cost[i])
    return best_f, best_thr, best_cost


def best_gradient_split(X, order, grad, hess, features, reg_lambda):
    n = X.shape[0]
    best_f, best_thr, best_gain = -1, 0.0, 0.0
    if n < 2:
        return best_f, best_thr, best_gain
    G = float(grad.sum())
    H = float(hess.sum())
    parent = G * G / (H + reg_lambda)
    for j, f in enumerate(features):
        o = order[:, j]
        xs = X[o, f]
        gl = np.cumsum(grad[o][:-1])
        hl = np.cumsum(hess[o][:-1])
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        gr = G - gl
        hr = H - hl
        gain = 0.5 * (gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda) - parent)
        gain = np.where(valid, gain, -np.inf)
        i = int(np.argmax(gain))
        if best_f < 0 or gain[i] > best_gain:
            best_f, best_thr, best_gain = int(f), _midpoint(xs[i], xs[i + 1]), float(gain[i])
    return best_f, best_thr, best_gain


def smo(K, y, C, tol, max_iter):
    n = K.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    diag = np.diag(K).copy()
    converged = False
    it = 0
    pos = y > 0
    while it < max_iter:
        v = -y * G
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (~pos & (alpha < C)) | (pos & (alpha > 0))
        if not up.any() or not low.any():
            converged = True
            break
        vu = np.where(up, v, -np.inf)
        i = int(np.argmax(vu))
        gmax = vu[i]
        gmin = np.min(v[low])
        if gmax - gmin < tol:
            converged = True
            break
        bb = gmax - v
        cand = low & (bb > 0)
        if not cand.any():
            converged = True
            break
        aa = diag[i] + diag - 2.0 * K[i]
        aa = np.where(aa <= 0, 1e-12, aa)
        obj = np.where(cand, -(bb * bb) / aa, np.inf)
        j = int(np.argmin(obj))

        yi, yj = y[i], y[j]
        old_ai, old_aj = alpha[i], alpha[j]
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = 1e-12
        ai, aj = old_ai, old_aj
        if yi != yj:
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            s = ai + aj
            ai -= delta
            aj += delta
            if s > C:
                if ai > C:
                    ai, aj = C, s - C
            elif aj < 0:
                aj, ai = 0.0, s
            if s > C:
                if aj > C:
                    aj, ai = C, s - C
            elif ai < 0:
                ai, aj = 0.0, s
        alpha[i], alpha[j] = ai, aj
        dai = ai - old_ai
        daj = aj - old_aj
        G += y * (yi * K[:, i] * dai + yj * K[:, j] * daj)
        it += 1
    return alpha, _bias(alpha, G, y, C), it, converged


def _bias(alpha, G, y, C):
    yg = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(np.sum(yg[free]) / np.count_nonzero(free))
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        ub = np.min(yg[up]) if up.any() else np.inf
        lb = np.max(yg[low]) if low.any() else -np.inf
        rho = 0.0 if not (np.isfinite(ub) and np.isfinite(lb)) else 0.5 * (ub + lb)
    return -rho


def _softplus(z):
    return np.logaddexp(0.0, z)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_gd(X, y, C, step, tol, max_iter, record_every):
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    converged = False
    losses = []
    it = 0
    while True:
        z = X @ w + b
        r = (_sigmoid(z) - y) / n
        loss = float(np.mean(_softplus(z) - y * z)) + 0.5 * float(w @ w) / C
        gw = X.T @ r + w / C
        gb = float(r.sum())
        if it >= max_iter:
            break
        if it % record_every == 0:
            losses.append(loss)
        if np.sqrt(gw @ gw + gb * gb) < tol:
            converged = True
            break
        w = w - step * gw
        b = b - step * gb
        it += 1
    losses.append(loss)
    return w, b, it, converged, losses
