"""Predictive density estimators p(y | x).

Every model stores the variance ratio ``r`` so it can be evaluated without
side information.  Scalar models broadcast over array arguments; a
``Product`` model takes vectors whose length equals its number of
components.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import kernels
from .gaussian_core import log_normal_pdf
from .priors import DiscretePrior, cluster_prior, three_point_lf, zero_prior
from .problem import PredictionProblem

__all__ = [
    "MLE",
    "HardThreshold",
    "PosteriorMean",
    "Uniform",
    "PlugIn",
    "Linear",
    "GaussianPair",
    "BayesDiscrete",
    "Threshold",
    "Product",
    "density",
    "log_density",
    "make_threshold",
    "make_threshold_cluster",
    "make_threshold_lf",
    "make_threshold_zero",
    "model_to_json",
]


# -- point estimators --------------------------------------------------------

@dataclass(frozen=True)
class MLE:
    def __call__(self, x):
        return np.asarray(x, dtype=float)[()]

    def to_json(self):
        return {"tag": "mle"}


@dataclass(frozen=True)
class HardThreshold:
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("threshold must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) > self.lam, x, 0.0)[()]

    def to_json(self):
        return {"tag": "hard_threshold", "lambda": self.lam}


@dataclass(frozen=True)
class PosteriorMean:
    prior: DiscretePrior

    def __call__(self, x):
        from .priors import posterior_mean

        return posterior_mean(self.prior, x, 1.0)

    def to_json(self):
        return {"tag": "posterior_mean", **self.prior.to_json()}


PointEstimator = Union[MLE, HardThreshold, PosteriorMean]


# -- predictive densities ----------------------------------------------------

class _Scalar:
    """Shared behaviour of the univariate models."""

    r: float

    def log_density(self, y, x):
        raise NotImplementedError

    def density(self, y, x):
        return np.exp(self.log_density(y, x))


class _Gaussian(_Scalar):
    """Models of the form N(mean(x), var(x)); KL loss has a closed form."""

    def gaussian_params(self, x):
        raise NotImplementedError

    def log_density(self, y, x):
        m, d = self.gaussian_params(x)
        return log_normal_pdf(y, m, d)


@dataclass(frozen=True)
class Uniform(_Gaussian):
    """Bayes rule for the flat prior: N(x, 1 + r)."""

    r: float

    def gaussian_params(self, x):
        x = np.asarray(x, dtype=float)
        return x, np.full_like(x, 1.0 + self.r)

    def to_json(self):
        return {"tag": "uniform", "r": self.r}


@dataclass(frozen=True)
class PlugIn(_Gaussian):
    """Estimative density N(theta_hat(x), r)."""

    r: float
    rule: PointEstimator

    def gaussian_params(self, x):
        m = np.asarray(self.rule(x), dtype=float)
        return m, np.full_like(m, self.r)

    def to_json(self):
        return {"tag": "plugin", "r": self.r, "rule": self.rule.to_json()}


@dataclass(frozen=True)
class Linear(_Gaussian):
    """Conjugate-prior Bayes rule N(alpha x, alpha + r), 0 <= alpha <= 1."""

    r: float
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")

    def gaussian_params(self, x):
        x = np.asarray(x, dtype=float)
        return self.alpha * x, np.full_like(x, self.alpha + self.r)

    def to_json(self):
        return {"tag": "linear", "r": self.r, "alpha": self.alpha}


@dataclass(frozen=True)
class GaussianPair(_Gaussian):
    """N(mean_rule(x), variance_rule(x)) for arbitrary rules."""

    r: float
    mean_rule: Callable
    variance_rule: Callable

    @classmethod
    def from_table(cls, r, grid, means, variances):
        """Rules tabulated on ``grid``, linearly interpolated (flat outside)."""
        grid = np.asarray(grid, dtype=float)
        means = np.asarray(means, dtype=float)
        variances = np.asarray(variances, dtype=float)
        if np.any(np.diff(grid) <= 0) or np.any(variances <= 0):
            raise ValueError("grid must increase and variances must be positive")
        return cls(
            r,
            lambda x: np.interp(x, grid, means),
            lambda x: np.interp(x, grid, variances),
        )

    @classmethod
    def variance_optimized(cls, r, mean_rule):
        """Pair with the variance r + theta_hat^2 that minimises risk at zero."""
        return cls(r, mean_rule, lambda x: r + np.asarray(mean_rule(x)) ** 2)

    def gaussian_params(self, x):
        x = np.asarray(x, dtype=float)
        return (
            np.broadcast_to(np.asarray(self.mean_rule(x), dtype=float), x.shape),
            np.broadcast_to(np.asarray(self.variance_rule(x), dtype=float), x.shape),
        )

    def to_json(self):
        return {"tag": "gaussian_pair", "r": self.r}


@dataclass(frozen=True)
class BayesDiscrete(_Scalar):
    """Bayes predictive density of a discrete prior: a posterior mixture of N(mu_k, r)."""

    r: float
    prior: DiscretePrior

    def log_density(self, y, x):
        y, x = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(x, dtype=float))
        out = kernels.bayes_log_predictive(
            x.ravel(), y.reshape(-1, 1), self.prior.locs, self.prior.log_weights, self.r
        )
        return out.reshape(x.shape)[()]

    def to_json(self):
        return {"tag": "bayes_discrete", "r": self.r, **self.prior.to_json()}


@dataclass(frozen=True)
class Threshold(_Scalar):
    """``below`` when |x| <= lam, ``above`` otherwise."""

    lam: float
    below: _Scalar
    above: _Scalar

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("threshold must be positive")
        for part in (self.below, self.above):
            if isinstance(part, (Threshold, Product)):
                raise ValueError("threshold branches must be simple univariate models")
        if self.below.r != self.above.r:
            raise ValueError("branches must share the same r")

    @property
    def r(self):
        return self.below.r

    def log_density(self, y, x):
        y, x = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(x, dtype=float))
        low = np.abs(x) <= self.lam
        out = np.empty(x.shape)
        if low.any():
            out[low] = self.below.log_density(y[low], x[low])
        if (~low).any():
            out[~low] = self.above.log_density(y[~low], x[~low])
        return out[()]

    def to_json(self):
        return {
            "tag": "threshold",
            "r": self.r,
            "lambda": self.lam,
            "below": self.below.to_json(),
            "above": self.above.to_json(),
        }


@dataclass(frozen=True)
class Product:
    """Coordinatewise product of univariate models."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps or any(isinstance(c, Product) for c in comps):
            raise ValueError("a product needs one or more univariate components")
        object.__setattr__(self, "components", comps)

    def __len__(self):
        return len(self.components)

    def log_density(self, y, x):
        y = np.asarray(y, dtype=float)
        x = np.asarray(x, dtype=float)
        n = len(self.components)
        if y.shape[-1:] != (n,) or x.shape[-1:] != (n,):
            raise ValueError(f"product of {n} components needs vectors of length {n}")
        y, x = np.broadcast_arrays(y, x)
        return sum(c.log_density(y[..., i], x[..., i]) for i, c in enumerate(self.components))

    def density(self, y, x):
        return np.exp(self.log_density(y, x))

    def to_json(self):
        return {"tag": "product", "components": [c.to_json() for c in self.components]}


Model = Union[Uniform, PlugIn, Linear, GaussianPair, BayesDiscrete, Threshold, Product]


def density(model, y, x):
    return model.density(y, x)


def log_density(model, y, x):
    return model.log_density(y, x)


def model_to_json(model) -> dict:
    return model.to_json()


# -- the threshold family ----------------------------------------------------

def make_threshold(problem: PredictionProblem, prior: DiscretePrior) -> Threshold:
    """Bayes rule of ``prior`` for |x| <= lambda_e, flat-prior rule above."""
    return Threshold(problem.lambda_e, BayesDiscrete(problem.r, prior), Uniform(problem.r))


def make_threshold_cluster(problem: PredictionProblem) -> Threshold:
    return make_threshold(problem, cluster_prior(problem))


def make_threshold_lf(problem: PredictionProblem) -> Threshold:
    return make_threshold(problem, three_point_lf(problem))


def make_threshold_zero(problem: PredictionProblem, lam: float | None = None) -> Threshold:
    """Predictive analog of hard thresholding: N(0, r) below the threshold."""
    lam = problem.lambda_e if lam is None else lam
    return Threshold(lam, BayesDiscrete(problem.r, zero_prior()), Uniform(problem.r))


MODEL_BUILDERS = {
    "hard": make_threshold_zero,
    "lf": make_threshold_lf,
    "cluster": make_threshold_cluster,
}
