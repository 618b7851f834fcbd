"""Scalar Gaussian special functions, truncated moments and quadrature rules.

Every risk computation in the package reduces to expectations under a
normal law.  The workhorse is composite Gauss-Legendre on a truncated window
``mean +/- 10 sd``, split at caller-supplied discontinuities such as the
threshold of a rule.  Gauss-Hermite is kept as an alternative for smooth
integrands over the whole line.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss
from scipy import special

__all__ = [
    "QuadratureSpec",
    "normal_pdf",
    "log_normal_pdf",
    "upper_tail",
    "log_upper_tail",
    "truncated_second_moment",
    "hermite_rule",
    "legendre_rule",
    "hermite_expectation",
    "normal_legendre_nodes",
    "normal_nodes",
    "default_quad",
]

LOG_2PI = math.log(2.0 * math.pi)
QUAD_ENV = "SPARSE_PREDEN_QUAD"
_MAX_NODES = 256


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts and domain-splitting policy for numerical integrals.

    Parameters
    ----------
    hermite_nodes : int
        Gauss-Hermite nodes for infinite-domain integrals.
    legendre_nodes : int
        Gauss-Legendre nodes per panel of a finite segment.
    split_points : tuple of float
        Abscissae at which the integrand is discontinuous; strictly increasing.
    tail_sds : float
        Half-width, in standard deviations, of the window that replaces the
        infinite tails of a normal expectation.
    panel_sds : float
        Maximal panel width in standard deviations; longer segments are
        subdivided.
    inner : {"legendre", "hermite"}
        Rule for the expectation over the future observation.  Composite
        Legendre is the default: the log of a Gaussian mixture has complex
        singularities close to the real axis, which slows Gauss-Hermite
        down to ~1e-5 accuracy at 96 nodes when the sparsity is extreme.
    """

    hermite_nodes: int = 96
    legendre_nodes: int = 64
    split_points: tuple[float, ...] = field(default=())
    tail_sds: float = 10.0
    panel_sds: float = 5.0
    inner: str = "legendre"

    def __post_init__(self):
        if self.hermite_nodes < 2 or self.legendre_nodes < 2:
            raise ValueError("quadrature node counts must be >= 2")
        if self.hermite_nodes > _MAX_NODES or self.legendre_nodes > _MAX_NODES:
            raise ValueError(f"quadrature node counts must be <= {_MAX_NODES}")
        pts = tuple(float(p) for p in self.split_points)
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("split_points must be strictly increasing")
        object.__setattr__(self, "split_points", pts)
        if self.tail_sds <= 0 or self.panel_sds <= 0:
            raise ValueError("tail_sds and panel_sds must be positive")
        if self.inner not in ("legendre", "hermite"):
            raise ValueError(f"unknown inner rule {self.inner!r}")

    def with_splits(self, *points: float) -> "QuadratureSpec":
        """Return a copy whose split points also include ``points``."""
        merged = sorted(set(self.split_points) | {float(p) for p in points})
        return replace(self, split_points=tuple(merged))

    @classmethod
    def from_env(cls, environ=None) -> "QuadratureSpec":
        """Defaults, overridden by ``SPARSE_PREDEN_QUAD="hermite,legendre"``."""
        environ = os.environ if environ is None else environ
        raw = environ.get(QUAD_ENV, "").strip()
        if not raw:
            return cls()
        try:
            h, l = (int(part) for part in raw.split(","))
        except ValueError as exc:
            raise ValueError(
                f"{QUAD_ENV} must look like 'hermite,legendre', got {raw!r}"
            ) from exc
        return cls(hermite_nodes=h, legendre_nodes=l)


@lru_cache(maxsize=8)
def _quad_for(raw):
    return QuadratureSpec.from_env({QUAD_ENV: raw})


def default_quad() -> QuadratureSpec:
    """Default rule, honouring ``SPARSE_PREDEN_QUAD`` at call time."""
    return _quad_for(os.environ.get(QUAD_ENV, ""))


def _check_variance(variance):
    if np.any(np.asarray(variance) <= 0):
        raise ValueError("variance must be positive")


def normal_pdf(x, mean=0.0, variance=1.0):
    """Density of N(mean, variance) at ``x``."""
    _check_variance(variance)
    return np.exp(log_normal_pdf(x, mean, variance))


def log_normal_pdf(x, mean=0.0, variance=1.0):
    """Log density of N(mean, variance) at ``x``."""
    _check_variance(variance)
    d = np.asarray(x, dtype=float) - mean
    out = -0.5 * (LOG_2PI + np.log(variance)) - d * d / (2.0 * variance)
    return out[()] if isinstance(out, np.ndarray) else out


def upper_tail(x):
    """P(Z > x) for standard normal Z.

    Evaluated through the complementary error function, so the far right
    tail keeps full relative precision instead of cancelling in 1 - CDF.
    Beyond x = 8 the value goes through the log tail, which still returns
    subnormal numbers where ``ndtr`` has already flushed to zero.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(under="ignore"):
        out = np.where(x > 8.0, np.exp(special.log_ndtr(-x)), special.ndtr(-x))
    return out[()]


def log_upper_tail(x):
    """log P(Z > x), finite for every real ``x``."""
    return special.log_ndtr(-np.asarray(x, dtype=float))[()]


def _tail_second_moment(z):
    # int_z^inf t^2 phi(t) dt = z phi(z) + Phi~(z), valid for every real z
    z = np.asarray(z, dtype=float)
    zphi = np.where(np.isfinite(z), z * normal_pdf(np.where(np.isfinite(z), z, 0.0)), 0.0)
    return zphi + upper_tail(z)


def truncated_second_moment(theta, lam):
    """Tail mass and tail second moment of X ~ N(theta, 1) outside [-lam, lam].

    Returns
    -------
    mass : P(|X| > lam)
    moment : E[(X - theta)^2 ; |X| > lam]
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("lambda must be nonnegative")
    theta = np.asarray(theta, dtype=float)
    hi = lam - theta
    lo = lam + theta
    mass = upper_tail(hi) + upper_tail(lo)
    moment = _tail_second_moment(hi) + _tail_second_moment(lo)
    return mass[()], moment[()]


@lru_cache(maxsize=None)
def _hermite_cached(n):
    t, w = hermgauss(n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@lru_cache(maxsize=None)
def _legendre_cached(n):
    t, w = leggauss(n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def _check_n(n):
    if not isinstance(n, (int, np.integer)) or not 2 <= n <= _MAX_NODES:
        raise ValueError(f"node count must be an integer in [2, {_MAX_NODES}], got {n!r}")


def hermite_rule(n):
    """Gauss-Hermite nodes and weights for the weight ``exp(-t^2)``."""
    _check_n(n)
    return _hermite_cached(int(n))


def legendre_rule(n, lo=-1.0, hi=1.0):
    """Gauss-Legendre nodes and weights mapped onto ``[lo, hi]``."""
    _check_n(n)
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    t, w = _legendre_cached(int(n))
    half = 0.5 * (hi - lo)
    return lo + half * (t + 1.0), half * w


def hermite_expectation(mean, variance, n):
    """Nodes and probability weights for E f(W), W ~ N(mean, variance).

    ``mean`` may be an array; the returned nodes then carry a trailing axis
    of length ``n``.
    """
    t, w = hermite_rule(n)
    mean = np.asarray(mean, dtype=float)
    nodes = mean[..., None] + math.sqrt(2.0 * variance) * t
    return nodes, w / math.sqrt(math.pi)


def normal_nodes(mean, sd, quad):
    """Nodes and probability weights for a smooth E f(W), W ~ N(mean, sd^2).

    Uses the rule selected by ``quad.inner`` and ignores split points.
    """
    if quad.inner == "hermite":
        return hermite_expectation(mean, sd * sd, quad.hermite_nodes)
    return normal_legendre_nodes(mean, sd, replace(quad, split_points=()))


def normal_legendre_nodes(mean, sd, quad, lo=-math.inf, hi=math.inf):
    """Nodes and weights for E[f(X); lo < X < hi] with X ~ N(mean, sd^2).

    The infinite tails are cut at ``mean +/- quad.tail_sds * sd``; the
    remaining interval is split at ``quad.split_points`` and into panels no
    wider than ``quad.panel_sds * sd``, each integrated by Gauss-Legendre.
    The normal density is folded into the weights.
    """
    a = max(lo, mean - quad.tail_sds * sd)
    b = min(hi, mean + quad.tail_sds * sd)
    if not a < b:
        return np.empty(0), np.empty(0)
    cuts = [a] + [p for p in quad.split_points if a < p < b] + [b]
    xs, ws = [], []
    for left, right in zip(cuts, cuts[1:]):
        panels = max(1, math.ceil((right - left) / (quad.panel_sds * sd)))
        edges = np.linspace(left, right, panels + 1)
        for pl, pr in zip(edges, edges[1:]):
            x, w = legendre_rule(quad.legendre_nodes, pl, pr)
            xs.append(x)
            ws.append(w)
    x = np.concatenate(xs)
    w = np.concatenate(ws) * normal_pdf(x, mean, sd * sd)
    return x, w
