"""Parameter bundle of the sparse prediction problem.

Past observations have unit variance; ``r`` is the future-to-past variance
ratio and ``eta`` the sparsity level.  Everything else (thresholds, the
overshoot root and its oracle-scaled version) is derived from these two.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

__all__ = [
    "InsufficientSparsityError",
    "PredictionProblem",
    "build_problem",
    "multivariate_problem",
    "max_admissible_eta",
    "overshoot_root",
]


class InsufficientSparsityError(ValueError):
    """Raised when eta is too large for the overshoot parameter to exist."""


@dataclass(frozen=True)
class PredictionProblem:
    r: float
    v_w: float
    eta: float
    lambda_e: float
    lambda_f: float
    a: float
    mu_eta: float
    nu_eta: float
    n: int | None = None
    s: int | None = None

    @property
    def level(self) -> float:
        """Reference risk level lambda_f^2 / (2 r)."""
        return self.lambda_f**2 / (2.0 * self.r)

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.n is None:
            del d["n"], d["s"]
        return d


def oracle_variance(r: float) -> float:
    return 1.0 / (1.0 + 1.0 / r)


def max_admissible_eta(r: float) -> float:
    """Supremum of the eta values with lambda_f(r, eta) > 1."""
    # lambda_f > 1  <=>  (1 - eta) / eta > exp(1 / (2 v_w))
    return 1.0 / (1.0 + math.exp(0.5 / oracle_variance(r)))


def overshoot_root(a: float, lambda_e: float) -> float:
    """Positive root of mu^2 + 2 a mu = lambda_e^2."""
    # rationalised form of sqrt(a^2 + l^2) - a; no cancellation for large a
    return lambda_e * lambda_e / (math.hypot(a, lambda_e) + a)


def build_problem(r: float, eta: float) -> PredictionProblem:
    """Derive the full parameter bundle from ``r`` and ``eta``.

    Raises
    ------
    ValueError
        If ``r <= 0`` or ``eta`` is outside (0, 1).
    InsufficientSparsityError
        If ``lambda_f <= 1``, where the overshoot parameter
        ``a = sqrt(2 log lambda_f)`` is not a positive real.
    """
    r = float(r)
    eta = float(eta)
    if not r > 0 or not math.isfinite(r):
        raise ValueError(f"r must be a positive real, got {r}")
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    eta_max = max_admissible_eta(r)
    if not eta < eta_max:
        raise InsufficientSparsityError(
            f"insufficient sparsity: eta={eta:g} gives lambda_f <= 1 for r={r:g}; "
            f"eta must be below {eta_max:.6g}"
        )
    v_w = oracle_variance(r)
    lambda_e = math.sqrt(2.0 * (-math.log(eta) + math.log1p(-eta)))
    lambda_f = math.sqrt(v_w) * lambda_e
    if not lambda_f > 1.0:  # rounding at the boundary
        raise InsufficientSparsityError(
            f"insufficient sparsity: lambda_f={lambda_f:.6g} <= 1 for r={r:g}; "
            f"eta must be below {eta_max:.6g}"
        )
    a = math.sqrt(2.0 * math.log(lambda_f))
    mu_eta = overshoot_root(a, lambda_e)
    return PredictionProblem(
        r=r,
        v_w=v_w,
        eta=eta,
        lambda_e=lambda_e,
        lambda_f=lambda_f,
        a=a,
        mu_eta=mu_eta,
        nu_eta=math.sqrt(v_w) * mu_eta,
    )


def multivariate_problem(r: float, n: int, s: int) -> PredictionProblem:
    """Problem at sparsity ``eta = s / n``, carrying ``n`` and ``s``."""
    if not (isinstance(n, int) and isinstance(s, int)) or not 1 <= s <= n:
        raise ValueError(f"need integers 1 <= s <= n, got n={n}, s={s}")
    if s == n:
        raise InsufficientSparsityError(
            f"insufficient sparsity: s = n = {n} leaves no zero coordinates"
        )
    p = build_problem(r, s / n)
    return PredictionProblem(**{**p.to_dict(), "n": n, "s": s})
