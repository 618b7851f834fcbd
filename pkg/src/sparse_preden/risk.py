"""Kullback-Leibler losses and risks of predictive density estimators.

Risks are nested expectations: an inner one over the future observation
``Y ~ N(theta, r)`` giving the loss at a past value ``x``, and an outer one
over ``X ~ N(theta, 1)``.  Gaussian models have a closed-form inner
expectation; discrete Bayes rules use quadrature.  The outer expectation is
always composite Gauss-Legendre, split wherever the model switches branch.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import kernels
from .estimators import (
    MLE,
    BayesDiscrete,
    HardThreshold,
    Linear,
    PlugIn,
    PosteriorMean,
    Threshold,
    Uniform,
    _Gaussian,
)
from .gaussian_core import (
    default_quad,
    legendre_rule,
    normal_legendre_nodes,
    normal_nodes,
    truncated_second_moment,
)
from .priors import DiscretePrior, cluster_locations, posterior_mean, two_point
from .problem import PredictionProblem, build_problem

__all__ = [
    "RiskCurve",
    "uniform_loss_coefficients",
    "gaussian_kl_loss",
    "kl_loss",
    "kl_risk",
    "closed_form_risk",
    "risk_decomposition",
    "quadratic_risk_hard_threshold",
    "bayes_quadratic_risk",
    "two_point_bayes_quadratic_risk",
    "connecting_equation_rhs",
    "qk_polynomials",
    "qk_min_bound",
    "golden_section_max",
    "sup_risk",
    "bayes_risk_sparse_class",
    "risk_curve",
]

def uniform_loss_coefficients(r):
    """(a1, a2) with KL loss of N(x, 1+r) equal to a1 + a2 (theta - x)^2."""
    a1 = 0.5 * (math.log1p(1.0 / r) - 1.0 / (1.0 + r))
    a2 = 0.5 / (1.0 + r)
    return a1, a2


def gaussian_kl_loss(theta, mean, var, r):
    """KL divergence from N(theta, r) to N(mean, var)."""
    mean = np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    return (0.5 * np.log(var / r) + (r + (mean - theta) ** 2) / (2.0 * var) - 0.5)[()]


def _split_points(model):
    if isinstance(model, Threshold):
        return (-model.lam, model.lam)
    if isinstance(model, PlugIn) and isinstance(model.rule, HardThreshold):
        return (-model.rule.lam, model.rule.lam)
    return ()


def kl_loss(model, theta, x, quad=None):
    """KL loss L(theta, p(.|x)) of a univariate model, vectorised over ``x``."""
    quad = quad or default_quad()
    x = np.asarray(x, dtype=float)
    if isinstance(model, _Gaussian):
        m, d = model.gaussian_params(x)
        return gaussian_kl_loss(theta, m, d, model.r)
    if isinstance(model, BayesDiscrete):
        y, w = normal_nodes(theta, math.sqrt(model.r), quad)
        prior = model.prior
        out = kernels.bayes_kl_loss(
            float(theta), x.ravel(), prior.locs, prior.log_weights, model.r, y, w
        )
        return out.reshape(x.shape)[()]
    if isinstance(model, Threshold):
        low = np.abs(x) <= model.lam
        out = np.empty(x.shape)
        if low.any():
            out[low] = kl_loss(model.below, theta, x[low], quad)
        if (~low).any():
            out[~low] = kl_loss(model.above, theta, x[~low], quad)
        return out[()]
    raise TypeError(f"kl_loss needs a univariate model, got {type(model).__name__}")


def kl_risk(model, theta, quad=None):
    """KL risk E_theta L(theta, p(.|X)) by outer Gauss-Legendre quadrature."""
    quad = (quad or default_quad()).with_splits(*_split_points(model))
    x, w = normal_legendre_nodes(float(theta), 1.0, quad)
    return float(w @ kl_loss(model, theta, x, quad))


def quadratic_risk_hard_threshold(theta, lam):
    """E_theta (X 1{|X| > lam} - theta)^2 in closed form."""
    _, q_above = truncated_second_moment(theta, lam)
    theta = np.asarray(theta, dtype=float)
    inside = special.ndtr(lam - theta) - special.ndtr(-lam - theta)
    return (q_above + theta**2 * inside)[()]


def closed_form_risk(model, theta):
    """Analytic KL risk, for the models that have one.

    Covers ``Uniform``, ``Linear``, ``PlugIn`` with the MLE or a hard
    threshold, and the zero-prior threshold rule.
    """
    theta = float(theta)
    if isinstance(model, Uniform):
        return 0.5 * math.log1p(1.0 / model.r)
    if isinstance(model, Linear):
        r, al = model.r, model.alpha
        if al == 1.0:
            return 0.5 * math.log1p(1.0 / r)
        return 0.5 * math.log1p(al / r) + (1 - al) ** 2 / (2 * (r + al)) * (
            theta**2 - al / (1 - al)
        )
    if isinstance(model, PlugIn):
        if isinstance(model.rule, MLE):
            return 1.0 / (2.0 * model.r)
        if isinstance(model.rule, HardThreshold):
            return float(quadratic_risk_hard_threshold(theta, model.rule.lam)) / (2.0 * model.r)
    if (
        isinstance(model, Threshold)
        and isinstance(model.above, Uniform)
        and isinstance(model.below, BayesDiscrete)
        and model.below.prior.locations == (0.0,)
    ):
        rho_a = _rho_above(model, theta)
        inside = special.ndtr(model.lam - theta) - special.ndtr(-model.lam - theta)
        return rho_a + theta**2 / (2.0 * model.r) * inside
    raise ValueError(f"no closed form for {type(model).__name__}")


def _rho_above(model, theta):
    a1, a2 = uniform_loss_coefficients(model.r)
    mass, moment = truncated_second_moment(theta, model.lam)
    return float(a1 * mass + a2 * moment)


def risk_decomposition(model, theta, quad=None):
    """Split the risk of a threshold rule by the position of X.

    Returns ``(rho_A, rho_B)``: the contribution of |X| > lambda in closed
    form, and that of |X| <= lambda by quadrature.
    """
    if not (isinstance(model, Threshold) and isinstance(model.above, Uniform)):
        raise ValueError("risk_decomposition needs a Threshold model with a Uniform upper branch")
    quad = quad or default_quad()
    rho_a = _rho_above(model, theta)
    x, w = normal_legendre_nodes(float(theta), 1.0, quad, -model.lam, model.lam)
    rho_b = float(w @ kl_loss(model.below, theta, x, quad)) if x.size else 0.0
    return rho_a, rho_b


def bayes_quadratic_risk(prior: DiscretePrior, theta, v=1.0, quad=None):
    """Squared-error risk at ``theta`` of the posterior mean at noise level ``v``."""
    quad = quad or default_quad()
    sd = math.sqrt(v)
    x, w = normal_legendre_nodes(float(theta), sd, quad)
    err = posterior_mean(prior, x, v) - theta
    return float(w @ (err * err))


def two_point_bayes_quadratic_risk(mu, problem: PredictionProblem, v=1.0, quad=None):
    """Risk at ``mu`` of the Bayes rule for the two-point prior (1-eta) d_0 + eta d_mu.

    Computed at unit noise after rescaling by sqrt(v).
    """
    if not v > 0:
        raise ValueError("v must be positive")
    if mu == 0:
        return 0.0
    c = math.sqrt(v)
    return v * bayes_quadratic_risk(two_point(problem.eta, mu / c), mu / c, 1.0, quad)


def connecting_equation_rhs(prior: DiscretePrior, theta, problem: PredictionProblem, quad=None):
    """Half the integral over v in [v_w, 1] of the quadratic Bayes risk, weight dv / v^2.

    For a Bayes predictive density this equals its KL risk at ``theta``.
    """
    quad = quad or default_quad()
    v, wv = legendre_rule(quad.legendre_nodes, problem.v_w, 1.0)
    q = np.array([bayes_quadratic_risk(prior, theta, vi, quad) for vi in v])
    return 0.5 * float(wv @ (q / v**2))


def qk_polynomials(problem: PredictionProblem, theta):
    """Values q_k(theta) for every positive cluster atom; trailing axis is k."""
    mu = np.array(cluster_locations(problem))
    r, lf = problem.r, problem.lambda_f
    t = np.asarray(theta, dtype=float)[..., None]
    return (t - (1 + r) * mu) ** 2 - r**2 * mu**2 + r * (lf**2 - mu**2)


def qk_min_bound(problem: PredictionProblem, theta):
    """min_k q_k(theta) over the cluster support points."""
    return np.min(qk_polynomials(problem, theta), axis=-1)[()]


def golden_section_max(f, lo, hi, tol):
    """Maximise a unimodal ``f`` on [lo, hi]; returns (argmax, max)."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    best = max(((fc, c), (fd, d), (f(a), a), (f(b), b)), key=lambda p: p[0])
    return best[1], best[0]


def _is_symmetric(model):
    if isinstance(model, (Uniform, Linear)):
        return True
    if isinstance(model, PlugIn):
        if isinstance(model.rule, PosteriorMean):
            return model.rule.prior.is_symmetric
        return True
    if isinstance(model, BayesDiscrete):
        return model.prior.is_symmetric
    if isinstance(model, Threshold):
        return _is_symmetric(model.below) and _is_symmetric(model.above)
    return False


def sup_risk(model, problem: PredictionProblem, quad=None, step=None, margin=3.0, workers=None):
    """Maximum KL risk over theta in [0, lambda_e + a + margin].

    A coarse grid (step lambda_f / 50 by default) locates the best point;
    golden-section search refines it on the two neighbouring cells.
    Symmetric models are searched on theta >= 0 only, others on the
    mirrored interval as well.

    Returns
    -------
    (theta_star, value)
    """
    quad = quad or default_quad()
    step = step or problem.lambda_f / 50.0
    hi = problem.lambda_e + problem.a + margin
    grid = np.arange(0.0, hi + 0.5 * step, step)
    if not _is_symmetric(model):
        grid = np.concatenate([-grid[:0:-1], grid])
    values = _parallel_map(lambda t: kl_risk(model, t, quad), grid, workers)
    i = int(np.argmax(values))  # first maximiser: ties go to the smaller theta
    if i == len(grid) - 1 or (i == 0 and grid[0] < 0):
        warnings.warn(
            f"risk maximum sits on the edge of the search interval (theta={grid[i]:.4g}); "
            "the supremum may lie further out",
            RuntimeWarning,
            stacklevel=2,
        )
    lo = grid[max(i - 1, 0)]
    up = grid[min(i + 1, len(grid) - 1)]
    if up > lo:
        t, val = golden_section_max(
            lambda t: kl_risk(model, t, quad), lo, up, 1e-6 * problem.lambda_f
        )
        if val >= values[i]:
            return float(t), float(val)
    return float(grid[i]), float(values[i])


def bayes_risk_sparse_class(model, problem: PredictionProblem, quad=None, **kw):
    """Worst-case Bayes risk over priors with at most eta mass off zero."""
    _, top = sup_risk(model, problem, quad, **kw)
    return (1.0 - problem.eta) * kl_risk(model, 0.0, quad) + problem.eta * top


def _parallel_map(fn, items, workers):
    items = list(items)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(fn, items)))
    return np.array([fn(t) for t in items])


@dataclass(frozen=True)
class RiskCurve:
    """Risk function sampled on a grid of theta values."""

    model_tag: str
    problem: PredictionProblem
    theta_grid: tuple
    values: tuple
    component: str = "total"
    metadata: dict = field(default_factory=dict, compare=False)

    HEADER = ("theta", "value", "component", "model", "r", "eta")

    def __post_init__(self):
        g = tuple(float(t) for t in self.theta_grid)
        v = tuple(float(t) for t in self.values)
        if len(g) != len(v):
            raise ValueError("grid and values differ in length")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ValueError("theta grid must be strictly increasing")
        if not all(math.isfinite(t) for t in v):
            raise ValueError("risk values must be finite")
        if self.component not in ("total", "rho_A", "rho_B"):
            raise ValueError(f"unknown component {self.component!r}")
        object.__setattr__(self, "theta_grid", g)
        object.__setattr__(self, "values", v)

    def to_csv(self) -> str:
        """CSV text; metadata goes in leading ``# key=value`` comment lines."""
        buf = io.StringIO()
        for k, v in self.metadata.items():
            buf.write(f"# {k}={_fmt(v) if isinstance(v, float) else v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.HEADER)
        r, eta = _fmt(self.problem.r), _fmt(self.problem.eta)
        for t, v in zip(self.theta_grid, self.values):
            w.writerow((_fmt(t), _fmt(v), self.component, self.model_tag, r, eta))
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RiskCurve":
        """Rebuild a curve from ``to_csv`` output; re-emitting gives identical text."""
        meta, rows = cls.parse_csv(text)
        if not rows:
            raise ValueError("risk curve CSV has no data rows")
        first = rows[0]
        problem = build_problem(float(first["r"]), float(first["eta"]))
        return cls(
            first["model"],
            problem,
            tuple(float(row["theta"]) for row in rows),
            tuple(float(row["value"]) for row in rows),
            first["component"],
            meta,
        )

    @staticmethod
    def parse_csv(text: str):
        """Inverse of ``to_csv`` at the text level: (metadata, rows)."""
        meta, body = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            elif line:
                body.append(line)
        rows = list(csv.DictReader(body))
        return meta, rows


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def risk_curve(model, problem, theta_grid, quad=None, component="total", tag=None, workers=None):
    """Evaluate the total risk, or one of its threshold components, on a grid."""
    quad = quad or default_quad()
    if component == "total":
        fn = lambda t: kl_risk(model, t, quad)  # noqa: E731
    elif component in ("rho_A", "rho_B"):
        idx = 0 if component == "rho_A" else 1
        fn = lambda t: risk_decomposition(model, t, quad)[idx]  # noqa: E731
    else:
        raise ValueError(f"unknown component {component!r}")
    grid = np.asarray(theta_grid, dtype=float)
    values = _parallel_map(fn, grid, workers)
    return RiskCurve(tag or type(model).__name__.lower(), problem, tuple(grid), tuple(values), component)
