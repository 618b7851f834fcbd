"""Asymptotic minimax levels, Monte Carlo lower bounds and sub-optimality checks.

All Monte Carlo draws come from numpy's counter-based Philox generator.
Samples are produced in fixed-size chunks, each with its own child of a
``SeedSequence``, so results depend only on the seed and the sample count,
never on how chunks are scheduled across worker threads.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .estimators import HardThreshold, Product, make_threshold_lf
from .gaussian_core import default_quad, legendre_rule, normal_legendre_nodes
from .problem import PredictionProblem, build_problem, oracle_variance
from .risk import kl_risk

__all__ = [
    "MinimaxSummary",
    "R_LF_LIMIT",
    "asymptotic_minimax",
    "asymptotic_minimax_univariate",
    "spike_tau",
    "spike_prior_mc",
    "spike_prior_mc_grid",
    "independent_blocks_bound",
    "lf_suboptimality_check",
    "gaussian_class_origin_risk",
    "multivariate_mc_risk",
]

#: Largest r for which the three-point rule is provably sub-optimal.
R_LF_LIMIT = (math.sqrt(2.0) - 1.0) / 2.0

CHUNK = 256


@dataclass(frozen=True)
class MinimaxSummary:
    """Leading-order minimax risks of the four estimator classes."""

    r: float
    n: int
    s: int
    risk_all: float
    risk_plugin: float
    risk_gaussian: float
    risk_linear: float
    inefficiency_plugin: float

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "MinimaxSummary":
        return cls(**json.loads(text))


def asymptotic_minimax(r, n, s) -> MinimaxSummary:
    """Minimax risks over s-sparse means in dimension n, to leading order."""
    if not r > 0:
        raise ValueError("r must be positive")
    if int(n) != n or int(s) != s or not 1 <= s < n:
        raise ValueError(f"need integers 1 <= s < n, got n={n}, s={s}")
    n, s = int(n), int(s)
    base = s * math.log(n / s)
    return MinimaxSummary(
        r=r,
        n=n,
        s=s,
        risk_all=base / (1.0 + r),
        risk_plugin=base / r,
        risk_gaussian=base / r,
        risk_linear=0.5 * n * math.log1p(1.0 / r),
        inefficiency_plugin=1.0 + 1.0 / r,
    )


def asymptotic_minimax_univariate(problem: PredictionProblem) -> float:
    """eta * lambda_f^2 / (2 r), the leading term of the univariate minimax risk."""
    return problem.eta * problem.level


# -- Monte Carlo helpers ------------------------------------------------------

def _chunk_sizes(samples, chunk=CHUNK):
    full, rest = divmod(samples, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _run_chunks(fn, samples, seed, workers=None, chunk=CHUNK):
    """Call ``fn(rng, size)`` once per chunk and concatenate in chunk order."""
    sizes = _chunk_sizes(samples, chunk)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(np.random.Generator(np.random.Philox(c)), k) for c, k in zip(children, sizes)]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: fn(*j), jobs))
    else:
        parts = [fn(*j) for j in jobs]
    return np.concatenate(parts, axis=0)


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    se = float(np.std(values, ddof=1) / math.sqrt(values.shape[0]))
    return float(np.mean(values)), se


def spike_tau(m):
    """tau_m = lambda_m - log lambda_m with lambda_m = sqrt(2 log m)."""
    lam = math.sqrt(2.0 * math.log(m))
    return lam - math.log(lam)


def _check_spike(n, samples):
    if int(n) != n or n < 2:
        raise ValueError("spike prior needs dimension n >= 2")
    if int(samples) != samples or samples < 100:
        raise ValueError("need at least 100 Monte Carlo samples")


def spike_prior_mc(n, tau, samples, seed=0, workers=None):
    """Monte Carlo estimate of E[1 - p_1(Y)]^2 under the single spike prior.

    The observation is ``Y = tau e_1 + Z`` in dimension ``n`` and ``p_1`` is
    the posterior probability that the spike sits in coordinate 1.

    Returns
    -------
    (estimate, std_error)
    """
    _check_spike(n, samples)
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    n, samples = int(n), int(samples)

    def chunk(rng, size):
        return kernels.spike_miss_sq(rng.standard_normal((size, n)), float(tau))

    return _mean_se(_run_chunks(chunk, samples, seed, workers))


def spike_prior_mc_grid(n, taus, samples, seed=0):
    """``spike_prior_mc`` over several signal sizes with common random numbers.

    Returns an array of shape ``(len(taus), 2)`` holding estimate and
    standard error per tau.
    """
    _check_spike(n, samples)
    taus = [float(t) for t in taus]
    n, samples = int(n), int(samples)

    def chunk(rng, size):
        z = rng.standard_normal((size, n))
        return np.stack([kernels.spike_miss_sq(z, t) for t in taus], axis=1)

    vals = _run_chunks(chunk, samples, seed)
    return np.array([_mean_se(vals[:, j]) for j in range(len(taus))])


def independent_blocks_bound(r, n, s, samples, seed=0, quad=None, v_nodes=8):
    """Monte Carlo lower bound from s independent single-spike blocks of size m = n // s.

    The block signal nu_m = sqrt(v_w) tau_m is rescaled to each noise level
    v in [v_w, 1] and the quadratic Bayes risk is integrated against
    dv / v.  All v nodes share one stream of normals, which keeps the
    integrand smooth in v.  Coordinates beyond m * s are ignored.
    """
    if int(n) != n or int(s) != s or s < 1:
        raise ValueError("n and s must be positive integers")
    m = int(n) // int(s)
    if m < 2:
        raise ValueError(f"block size n // s = {m} must be at least 2")
    v_w = oracle_variance(r)
    nu = math.sqrt(v_w) * spike_tau(m)
    v, wv = legendre_rule(v_nodes, v_w, 1.0)
    taus = nu / np.sqrt(v)
    est = spike_prior_mc_grid(m, taus, samples, seed)[:, 0]
    return float(s * 0.5 * np.sum(wv * taus**2 * est / v))


def lf_suboptimality_check(r, eta, quad=None):
    """Risk ratio of the three-point threshold rule at theta* = 2(1+r) nu_eta.

    Returns ``rho(theta*) / (lambda_f^2 / (2 r))``; values above 1 show the
    rule misses the minimax level.
    """
    if not 0 < r < R_LF_LIMIT:
        raise ValueError(f"r must lie in (0, {R_LF_LIMIT:.6f}), got {r}")
    problem = build_problem(r, eta)
    theta = 2.0 * (1.0 + r) * problem.nu_eta
    gap = problem.lambda_e - problem.a
    if not theta < gap:
        raise ValueError(
            f"eta={eta:g} is too large for r={r}: need 2(1+r) nu_eta < lambda_e - a "
            f"(got {theta:.4f} >= {gap:.4f}); decrease eta"
        )
    return kl_risk(make_threshold_lf(problem), theta, quad) / problem.level


def gaussian_class_origin_risk(theta_hat_rule, problem: PredictionProblem, quad=None):
    """E_0 log(1 + theta_hat(X)^2 / r), the risk at zero of N(theta_hat, r + theta_hat^2)."""
    quad = quad or default_quad()
    if isinstance(theta_hat_rule, HardThreshold):
        quad = quad.with_splits(-theta_hat_rule.lam, theta_hat_rule.lam)
    x, w = normal_legendre_nodes(0.0, 1.0, quad)
    t = np.asarray(theta_hat_rule(x), dtype=float)
    return float(w @ np.log1p(t * t / problem.r))


def multivariate_mc_risk(product_model: Product, theta, samples, seed=0, workers=None):
    """Monte Carlo KL risk of a product model at the mean vector ``theta``.

    Each replicate draws X ~ N(theta, I) and Y ~ N(theta, r I) and records
    log p(Y | theta) - log p_hat(Y | X).

    Returns
    -------
    (estimate, std_error)
    """
    theta = np.asarray(theta, dtype=float)
    n = len(product_model)
    if theta.shape != (n,):
        raise ValueError(f"theta must have length {n}")
    r = np.array([c.r for c in product_model.components])
    sd_y = np.sqrt(r)
    const = -0.5 * np.sum(np.log(2.0 * math.pi * r))

    def chunk(rng, size):
        x = theta + rng.standard_normal((size, n))
        y = theta + sd_y * rng.standard_normal((size, n))
        true = const - np.sum((y - theta) ** 2 / (2.0 * r), axis=1)
        return true - product_model.log_density(y, x)

    return _mean_se(_run_chunks(chunk, int(samples), seed, workers, chunk=4096))
