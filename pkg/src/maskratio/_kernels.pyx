# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: split scanning for the tree learners and the SMO solver.

Every function here has a twin in ``_kernels_py`` with the same signature
and the same tie-breaking; ``maskratio.kernels`` picks one at import.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log2, log1p, exp, sqrt

cnp.import_array()

DEF GINI = 0
DEF ENTROPY = 1


cdef inline double _impurity(double n, double n1, int criterion) nogil:
    cdef double p, q, out
    if n <= 0:
        return 0.0
    p = n1 / n
    q = 1.0 - p
    if criterion == GINI:
        return 1.0 - p * p - q * q
    out = 0.0
    if p > 0:
        out -= p * log2(p)
    if q > 0:
        out -= q * log2(q)
    return out


def best_class_split(const double[:, ::1] X, const cnp.int64_t[:, ::1] order,
                     const cnp.int64_t[::1] y, const cnp.int64_t[::1] features,
                     int criterion, Py_ssize_t min_samples_leaf):
    """Best threshold split over ``features`` for 0/1 labels.

    ``order[:, j]`` sorts ``X[:, features[j]]``. Returns
    ``(feature, threshold, cost)`` where cost is the count-weighted child
    impurity; feature is -1 when no admissible split exists.
    """
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t nf = features.shape[0]
    cdef Py_ssize_t j, i, f, a, b
    cdef double total1 = 0.0, left1, cost, thr, xa, xb
    cdef double best_cost = 0.0, best_thr = 0.0
    cdef Py_ssize_t best_f = -1
    cdef double nl, nr
    for i in range(n):
        total1 += y[i]
    with nogil:
        for j in range(nf):
            f = features[j]
            left1 = 0.0
            for i in range(n - 1):
                a = order[i, j]
                b = order[i + 1, j]
                left1 += y[a]
                xa = X[a, f]
                xb = X[b, f]
                if not (xa < xb):
                    continue
                if i + 1 < min_samples_leaf or n - i - 1 < min_samples_leaf:
                    continue
                nl = <double>(i + 1)
                nr = <double>(n - i - 1)
                cost = (nl * _impurity(nl, left1, criterion)
                        + nr * _impurity(nr, total1 - left1, criterion))
                if best_f < 0 or cost < best_cost:
                    thr = 0.5 * (xa + xb)
                    if thr >= xb:
                        thr = xa
                    best_cost = cost
                    best_thr = thr
                    best_f = f
    return best_f, best_thr, best_cost


def best_gradient_split(const double[:, ::1] X, const cnp.int64_t[:, ::1] order,
                        const double[::1] grad, const double[::1] hess,
                        const cnp.int64_t[::1] features, double reg_lambda):
    """Best second-order split (gain before the gamma penalty).

    Returns ``(feature, threshold, gain)``; feature is -1 if no split exists.
    """
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t nf = features.shape[0]
    cdef Py_ssize_t j, i, f, a, b
    cdef double G = 0.0, H = 0.0, gl, hl, gr, hr, gain, parent, thr, xa, xb
    cdef double best_gain = 0.0, best_thr = 0.0
    cdef Py_ssize_t best_f = -1
    for i in range(n):
        G += grad[i]
        H += hess[i]
    parent = G * G / (H + reg_lambda)
    with nogil:
        for j in range(nf):
            f = features[j]
            gl = 0.0
            hl = 0.0
            for i in range(n - 1):
                a = order[i, j]
                b = order[i + 1, j]
                gl += grad[a]
                hl += hess[a]
                xa = X[a, f]
                xb = X[b, f]
                if not (xa < xb):
                    continue
                gr = G - gl
                hr = H - hl
                gain = 0.5 * (gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda) - parent)
                if best_f < 0 or gain > best_gain:
                    thr = 0.5 * (xa + xb)
                    if thr >= xb:
                        thr = xa
                    best_gain = gain
                    best_thr = thr
                    best_f = f
    return best_f, best_thr, best_gain


def smo(const double[:, ::1] K, const double[::1] y, double C, double tol,
        Py_ssize_t max_iter):
    """Solve the soft-margin SVM dual by SMO with second-order working-set selection.

    ``y`` holds +1/-1. Returns ``(alpha, b, n_iter, converged)`` where the
    decision function is ``sum(alpha * y * K[:, x]) + b``.
    """
    cdef Py_ssize_t n = K.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha_arr = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grad_arr = -np.ones(n)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] G = grad_arr
    cdef Py_ssize_t it = 0, t, i, j
    cdef double gmax, gmin, v, bb, aa, obj, best_obj
    cdef double yi, yj, qij, quad, delta, diff, s, old_ai, old_aj, dai, daj
    cdef bint converged = False
    cdef bint up, low
    with nogil:
        while it < max_iter:
            gmax = -1e300
            gmin = 1e300
            i = -1
            for t in range(n):
                v = -y[t] * G[t]
                up = (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0)
                low = (y[t] < 0 and alpha[t] < C) or (y[t] > 0 and alpha[t] > 0)
                if up and v > gmax:
                    gmax = v
                    i = t
                if low and v < gmin:
                    gmin = v
            if i < 0 or gmax - gmin < tol:
                converged = True
                break
            j = -1
            best_obj = 1e300
            for t in range(n):
                low = (y[t] < 0 and alpha[t] < C) or (y[t] > 0 and alpha[t] > 0)
                if not low:
                    continue
                v = -y[t] * G[t]
                bb = gmax - v
                if bb > 0:
                    aa = K[i, i] + K[t, t] - 2.0 * K[i, t]
                    if aa <= 0:
                        aa = 1e-12
                    obj = -(bb * bb) / aa
                    if obj < best_obj:
                        best_obj = obj
                        j = t
            if j < 0:
                converged = True
                break
            yi = y[i]
            yj = y[j]
            old_ai = alpha[i]
            old_aj = alpha[j]
            quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
            if quad <= 0:
                quad = 1e-12
            if yi != yj:
                delta = (-G[i] - G[j]) / quad
                diff = alpha[i] - alpha[j]
                alpha[i] += delta
                alpha[j] += delta
                if diff > 0:
                    if alpha[j] < 0:
                        alpha[j] = 0
                        alpha[i] = diff
                else:
                    if alpha[i] < 0:
                        alpha[i] = 0
                        alpha[j] = -diff
                if diff > 0:
                    if alpha[i] > C:
                        alpha[i] = C
                        alpha[j] = C - diff
                else:
                    if alpha[j] > C:
                        alpha[j] = C
                        alpha[i] = C + diff
            else:
                delta = (G[i] - G[j]) / quad
                s = alpha[i] + alpha[j]
                alpha[i] -= delta
                alpha[j] += delta
                if s > C:
                    if alpha[i] > C:
                        alpha[i] = C
                        alpha[j] = s - C
                else:
                    if alpha[j] < 0:
                        alpha[j] = 0
                        alpha[i] = s
                if s > C:
                    if alpha[j] > C:
                        alpha[j] = C
                        alpha[i] = s - C
                else:
                    if alpha[i] < 0:
                        alpha[i] = 0
                        alpha[j] = s
            dai = alpha[i] - old_ai
            daj = alpha[j] - old_aj
            for t in range(n):
                G[t] += y[t] * (yi * K[t, i] * dai + yj * K[t, j] * daj)
            it += 1
    return alpha_arr, _bias(alpha_arr, grad_arr, np.asarray(y), C), it, converged


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


cdef inline double _softplus(double z) nogil:
    # log(1 + e^z), stable for large |z|
    if z > 0:
        return z + log1p(exp(-z))
    return log1p(exp(z))


cdef inline double _sigmoid(double z) nogil:
    cdef double e
    if z >= 0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


def logistic_gd(const double[:, ::1] X, const double[::1] y, double C, double step,
                double tol, Py_ssize_t max_iter, Py_ssize_t record_every):
    """Full-batch gradient descent on mean cross-entropy + ||w||^2 / (2C).

    Returns ``(w, b, n_iter, converged, losses)``; ``losses`` holds the
    objective every ``record_every`` iterations plus the final value.
    """
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_arr = np.zeros(d)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gw_arr = np.zeros(d)
    cdef double[::1] w = w_arr
    cdef double[::1] gw = gw_arr
    cdef double b = 0.0, gb, z, r, loss, norm2, inv_n = 1.0 / n
    cdef Py_ssize_t it, i, j
    cdef bint converged = False
    losses = []
    it = 0
    while True:
        loss = 0.0
        gb = 0.0
        for j in range(d):
            gw[j] = 0.0
        for i in range(n):
            z = b
            for j in range(d):
                z += X[i, j] * w[j]
            loss += _softplus(z) - y[i] * z
            r = (_sigmoid(z) - y[i]) * inv_n
            gb += r
            for j in range(d):
                gw[j] += X[i, j] * r
        loss *= inv_n
        norm2 = 0.0
        for j in range(d):
            loss += 0.5 * w[j] * w[j] / C
            gw[j] += w[j] / C
            norm2 += gw[j] * gw[j]
        norm2 += gb * gb
        if it >= max_iter:
            break
        if it % record_every == 0:
            losses.append(loss)
        if sqrt(norm2) < tol:
            converged = True
            break
        for j in range(d):
            w[j] -= step * gw[j]
        b -= step * gb
        it += 1
    losses.append(loss)
    return w_arr, b, it, converged, losses
