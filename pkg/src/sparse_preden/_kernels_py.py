"""Pure numpy versions of the hot kernels.

Reference implementation and fallback for the compiled ``_kernels_c``
module; both expose the same functions with the same signatures.
"""
import math

import numpy as np
from scipy.special import logsumexp

LOG_2PI = math.log(2.0 * math.pi)


def log_posterior_weights(x, locs, logw, v):
    """Normalised log posterior weights, shape ``(len(x), len(locs))``."""
    x = np.asarray(x, dtype=float)
    z = logw[None, :] - (x[:, None] - locs[None, :]) ** 2 / (2.0 * v)
    return z - logsumexp(z, axis=1, keepdims=True)


def posterior_mean(x, locs, logw, v):
    lp = log_posterior_weights(x, locs, logw, v)
    return np.exp(lp) @ locs


def bayes_log_predictive(x, y, locs, logw, r):
    """log p(y | x) for the discrete-prior Bayes predictive density.

    ``y`` has shape ``(len(x), m)``; the result has the same shape.
    """
    lp = log_posterior_weights(x, locs, logw, 1.0)
    y = np.asarray(y, dtype=float)
    z = lp[:, None, :] - (y[:, :, None] - locs[None, None, :]) ** 2 / (2.0 * r)
    return logsumexp(z, axis=2) - 0.5 * (LOG_2PI + math.log(r))


def bayes_kl_loss(theta, x, locs, logw, r, y, w):
    """KL loss of the discrete Bayes predictive density at each past value.

    ``y, w`` are nodes and probability weights for the expectation over the
    future observation Y ~ N(theta, r).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lp = log_posterior_weights(x, locs, logw, 1.0)
    # log p(y|x) - log phi(y|theta, r); the Gaussian normaliser cancels
    z = lp[:, None, :] - (y[None, :, None] - locs[None, None, :]) ** 2 / (2.0 * r)
    lr = logsumexp(z, axis=2) + (y - theta) ** 2 / (2.0 * r)
    return -(lr @ np.asarray(w, dtype=float))


def spike_miss_sq(z, tau):
    """(1 - p1)^2 per row, p1 the posterior mass of the spike at index 0.

    ``z`` is an ``(N, n)`` block of standard normals; the observation is
    ``tau * e_1 + z``.
    """
    s = tau * np.asarray(z, dtype=float)
    s[:, 0] += tau * tau
    # 1 - p1 = sum_{j>1} e^{s_j} / sum_j e^{s_j}, computed without cancellation
    miss = np.exp(logsumexp(s[:, 1:], axis=1) - logsumexp(s, axis=1))
    return miss * miss
