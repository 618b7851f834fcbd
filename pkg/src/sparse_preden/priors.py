"""Discrete priors on the mean and their Bayes machinery.

A prior is a finite list of atoms ``(location, weight)``.  Marginals,
posterior weights and posterior means are available at any noise level
``v`` and are computed in the log domain: with ``lambda_e^2 ~ 40`` the
ratio of atom likelihoods overflows double precision long before the
observation is large.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from . import kernels
from .gaussian_core import LOG_2PI
from .problem import PredictionProblem

__all__ = [
    "DiscretePrior",
    "two_point",
    "three_point_lf",
    "zero_prior",
    "cluster_prior",
    "cluster_locations",
    "k_count_limit",
    "scale",
    "marginal_density",
    "log_marginal_density",
    "posterior_weights",
    "posterior_mean",
]


@dataclass(frozen=True)
class DiscretePrior:
    """Finite mixture of point masses.

    ``locations`` and ``weights`` are stored as tuples; the atom at zero, if
    any, comes first.  Weights are positive and sum to one.
    """

    locations: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        locs = tuple(float(u) for u in self.locations)
        w = tuple(float(p) for p in self.weights)
        if len(locs) != len(w) or not locs:
            raise ValueError("need one weight per location and at least one atom")
        if any(p <= 0 for p in w):
            raise ValueError("atom weights must be positive")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {math.fsum(w)!r}, not 1")
        if len(set(locs)) != len(locs):
            raise ValueError("atom locations must be distinct")
        if 0.0 in locs and locs[0] != 0.0:
            i = locs.index(0.0)
            locs = (0.0,) + locs[:i] + locs[i + 1:]
            w = (w[i],) + w[:i] + w[i + 1:]
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, atoms) -> "DiscretePrior":
        atoms = list(atoms)
        return cls(tuple(a[0] for a in atoms), tuple(a[1] for a in atoms))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.locations, self.weights))

    @cached_property
    def locs(self) -> np.ndarray:
        a = np.array(self.locations)
        a.setflags(write=False)
        return a

    @cached_property
    def log_weights(self) -> np.ndarray:
        a = np.log(np.array(self.weights))
        a.setflags(write=False)
        return a

    @property
    def is_symmetric(self) -> bool:
        pairs = dict(self.atoms)
        return all(
            (-u in pairs) and math.isclose(pairs[-u], p, rel_tol=1e-12)
            for u, p in pairs.items()
        )

    def __len__(self) -> int:
        return len(self.locations)

    def to_json(self) -> dict:
        return {"atoms": [[u, p] for u, p in self.atoms]}

    @classmethod
    def from_json(cls, obj) -> "DiscretePrior":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls.from_atoms(obj["atoms"])


def zero_prior() -> DiscretePrior:
    """Point mass at the origin."""
    return DiscretePrior((0.0,), (1.0,))


def two_point(eta: float, mu: float) -> DiscretePrior:
    """``(1 - eta) delta_0 + eta delta_mu``; collapses to delta_0 when mu = 0."""
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    if mu == 0:
        return zero_prior()
    return DiscretePrior((0.0, float(mu)), (1.0 - eta, eta))


def three_point_lf(problem: PredictionProblem) -> DiscretePrior:
    """Symmetric three-point prior with mass eta/2 at each of +/- nu_eta."""
    eta, nu = problem.eta, problem.nu_eta
    return DiscretePrior((0.0, -nu, nu), (1.0 - eta, eta / 2, eta / 2))


def cluster_locations(problem: PredictionProblem) -> list[float]:
    """Positive support points nu_eta (1+2r)^(k-1), k = 1..K.

    K is the largest k with mu_k <= lambda_e + a (ties included).
    """
    top = problem.lambda_e + problem.a
    ratio = 1.0 + 2.0 * problem.r
    out = []
    mu = problem.nu_eta
    while mu <= top:
        out.append(mu)
        mu *= ratio
    return out


def cluster_prior(problem: PredictionProblem) -> DiscretePrior:
    """Sparse cluster prior: mass 1 - eta at 0, eta/(2K) at each of +/- mu_k."""
    pos = cluster_locations(problem)
    K = len(pos)
    assert K >= 1, "nu_eta < lambda_e + a always holds for a valid problem"
    w = problem.eta / (2 * K)
    locs = [0.0]
    for mu in pos:
        locs += [-mu, mu]
    return DiscretePrior(tuple(locs), (1.0 - problem.eta,) + (w,) * (2 * K))


def k_count_limit(r: float) -> int:
    """Small-sparsity limit of the number K of positive cluster atoms.

    As eta -> 0, (lambda_e + a) / nu_eta -> sqrt(1 + 1/r), so
    K = max{k : (k-1) log(1+2r) <= log(1 + 1/r) / 2}.
    """
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    ratio = math.log1p(1.0 / r) / (2.0 * math.log1p(2.0 * r))
    return 1 + math.floor(ratio)


def scale(prior: DiscretePrior, c: float) -> DiscretePrior:
    """Multiply every atom location by ``c > 0``."""
    if not c > 0:
        raise ValueError("scale factor must be positive")
    return DiscretePrior(tuple(c * u for u in prior.locations), prior.weights)


def _check_v(v):
    if not v > 0:
        raise ValueError(f"noise level v must be positive, got {v}")


def log_marginal_density(prior: DiscretePrior, x, v: float = 1.0):
    """log m_v(x) = log sum_k pi_k phi(x | mu_k, v)."""
    _check_v(v)
    x = np.asarray(x, dtype=float)
    z = prior.log_weights - (x[..., None] - prior.locs) ** 2 / (2.0 * v)
    return (logsumexp(z, axis=-1) - 0.5 * (LOG_2PI + math.log(v)))[()]


def marginal_density(prior: DiscretePrior, x, v: float = 1.0):
    return np.exp(log_marginal_density(prior, x, v))


def posterior_weights(prior: DiscretePrior, x, v: float = 1.0) -> np.ndarray:
    """Posterior atom probabilities; trailing axis indexes the atoms."""
    _check_v(v)
    x = np.asarray(x, dtype=float)
    lp = kernels.log_posterior_weights(x.ravel(), prior.locs, prior.log_weights, float(v))
    return np.exp(lp).reshape(x.shape + (len(prior),))


def posterior_mean(prior: DiscretePrior, x, v: float = 1.0):
    """Bayes rule for squared error, E[theta | x] at noise level ``v``."""
    _check_v(v)
    x = np.asarray(x, dtype=float)
    out = kernels.posterior_mean(x.ravel(), prior.locs, prior.log_weights, float(v))
    return out.reshape(x.shape)[()]
