# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels; see ``_kernels_py`` for the contract."""
import numpy as np
from libc.math cimport exp, log, sqrt, M_PI

cdef double LOG_2PI = log(2.0 * M_PI)


cdef void _log_post(double x, const double[::1] locs, const double[::1] logw,
                    double v, double* out) noexcept nogil:
    cdef Py_ssize_t k, K = locs.shape[0]
    cdef double d, m = -1e308, s = 0.0
    for k in range(K):
        d = x - locs[k]
        out[k] = logw[k] - d * d / (2.0 * v)
        if out[k] > m:
            m = out[k]
    for k in range(K):
        s += exp(out[k] - m)
    s = m + log(s)
    for k in range(K):
        out[k] -= s


def log_posterior_weights(x, const double[::1] locs, const double[::1] logw, double v):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = xv.shape[0], K = locs.shape[0]
    out = np.empty((n, K))
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            _log_post(xv[i], locs, logw, v, &o[i, 0])
    return out


def posterior_mean(x, const double[::1] locs, const double[::1] logw, double v):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, k, n = xv.shape[0], K = locs.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double[::1] lp = np.empty(K)
    cdef double acc
    with nogil:
        for i in range(n):
            _log_post(xv[i], locs, logw, v, &lp[0])
            acc = 0.0
            for k in range(K):
                acc += exp(lp[k]) * locs[k]
            o[i] = acc
    return out


cdef inline double _lse_pred(double y, const double[::1] locs, double* lp,
                             double r) noexcept nogil:
    cdef Py_ssize_t k, K = locs.shape[0]
    cdef double d, z, m = -1e308, s = 0.0
    for k in range(K):
        d = y - locs[k]
        z = lp[k] - d * d / (2.0 * r)
        if z > m:
            m = z
    for k in range(K):
        d = y - locs[k]
        s += exp(lp[k] - d * d / (2.0 * r) - m)
    return m + log(s)


def bayes_log_predictive(x, y, const double[::1] locs, const double[::1] logw, double r):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[:, ::1] yv = np.ascontiguousarray(y, dtype=np.float64).reshape(xv.shape[0], -1)
    cdef Py_ssize_t i, j, n = yv.shape[0], m = yv.shape[1], K = locs.shape[0]
    out = np.empty((n, m))
    cdef double[:, ::1] o = out
    cdef double[::1] lp = np.empty(K)
    cdef double c = 0.5 * (LOG_2PI + log(r))
    with nogil:
        for i in range(n):
            _log_post(xv[i], locs, logw, 1.0, &lp[0])
            for j in range(m):
                o[i, j] = _lse_pred(yv[i, j], locs, &lp[0], r) - c
    return out


def bayes_kl_loss(double theta, x, const double[::1] locs, const double[::1] logw,
                  double r, y, w):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t i, j, n = xv.shape[0], m = yv.shape[0], K = locs.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double[::1] lp = np.empty(K)
    cdef double[::1] q = np.empty(m)
    cdef double acc
    with nogil:
        for j in range(m):
            q[j] = (yv[j] - theta) * (yv[j] - theta) / (2.0 * r)
        for i in range(n):
            _log_post(xv[i], locs, logw, 1.0, &lp[0])
            acc = 0.0
            for j in range(m):
                acc += wv[j] * (_lse_pred(yv[j], locs, &lp[0], r) + q[j])
            o[i] = -acc
    return out


def spike_miss_sq(z, double tau):
    cdef const double[:, ::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t i, j, N = zv.shape[0], n = zv.shape[1]
    out = np.empty(N)
    cdef double[::1] o = out
    cdef double s0, m, rest, miss
    with nogil:
        for i in range(N):
            s0 = tau * (tau + zv[i, 0])
            m = s0
            for j in range(1, n):
                if tau * zv[i, j] > m:
                    m = tau * zv[i, j]
            rest = 0.0
            for j in range(1, n):
                rest += exp(tau * zv[i, j] - m)
            # miss = rest / (rest + e^{s0 - m})
            miss = rest / (rest + exp(s0 - m))
            o[i] = miss * miss
    return out
