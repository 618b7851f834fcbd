import json
import math

import numpy as np
import pytest

from sparse_preden.estimators import (
    MLE,
    HardThreshold,
    Product,
    Uniform,
    make_threshold_cluster,
    make_threshold_lf,
    make_threshold_zero,
)
from sparse_preden.minimax import (
    R_LF_LIMIT,
    MinimaxSummary,
    asymptotic_minimax,
    asymptotic_minimax_univariate,
    gaussian_class_origin_risk,
    independent_blocks_bound,
    lf_suboptimality_check,
    multivariate_mc_risk,
    spike_prior_mc,
    spike_prior_mc_grid,
    spike_tau,
)
from sparse_preden.problem import build_problem, multivariate_problem
from sparse_preden.risk import bayes_risk_sparse_class, kl_risk, sup_risk

# 30-digit mpmath quadrature of E log(1 + Z^2)
ORIGIN_MLE_R1 = 0.5334531798441348


class TestAsymptotic:
    def test_unit_r(self):
        out = asymptotic_minimax(1.0, 1000, 10)
        assert out.risk_all == pytest.approx(10 * math.log(100) / 2, rel=1e-15)
        assert out.risk_plugin == pytest.approx(10 * math.log(100), rel=1e-15)
        assert out.inefficiency_plugin == 2.0
        assert out.risk_linear == pytest.approx(500 * math.log(2.0), rel=1e-15)

    @pytest.mark.parametrize("r,n,s", [(0.25, 400, 20), (1.0, 10**6, 1), (4.0, 50, 49)])
    def test_identities(self, r, n, s):
        out = asymptotic_minimax(r, n, s)
        assert out.risk_plugin == pytest.approx((1 + 1 / r) * out.risk_all, rel=1e-15)
        assert out.risk_plugin == out.risk_gaussian
        assert out.risk_all <= out.risk_plugin

    def test_linear_dominates_when_sparse(self):
        ratios = [asymptotic_minimax(0.5, 10**k, 1) for k in (2, 4, 6)]
        r = [o.risk_linear / o.risk_all for o in ratios]
        assert r[0] < r[1] < r[2] and r[0] > 1

    @pytest.mark.parametrize("n,s", [(10, 10), (10, 0), (10, 11)])
    def test_invalid(self, n, s):
        with pytest.raises(ValueError):
            asymptotic_minimax(1.0, n, s)

    def test_json_round_trip(self):
        out = asymptotic_minimax(0.25, 400, 20)
        text = out.to_json(sort_keys=True)
        assert MinimaxSummary.from_json(text) == out
        assert set(json.loads(text)) == {
            "r", "n", "s", "risk_all", "risk_plugin", "risk_gaussian", "risk_linear", "inefficiency_plugin"
        }

    def test_univariate_levels(self, sparse, moderate):
        assert asymptotic_minimax_univariate(sparse) / sparse.eta == pytest.approx(16.0, abs=1e-8)
        assert asymptotic_minimax_univariate(moderate) / moderate.eta == pytest.approx(2.3556, abs=1e-4)

    def test_univariate_matches_multivariate(self):
        p = multivariate_problem(0.5, 10**6, 10)
        leading = p.n * asymptotic_minimax_univariate(p)
        # lambda_f^2 = 2 v_w log((1 - eta) / eta); the (1 - eta) factor is the only difference
        expected = asymptotic_minimax(0.5, p.n, p.s).risk_all * math.log((1 - p.eta) / p.eta) / math.log(1 / p.eta)
        assert leading == pytest.approx(expected, rel=1e-12)


class TestSpike:
    def test_no_signal(self):
        est, se = spike_prior_mc(50, 0.0, 200, seed=1)
        assert est == pytest.approx((1 - 1 / 50) ** 2, rel=1e-12)
        assert se == pytest.approx(0.0, abs=1e-12)

    def test_reproducible_and_bounded(self):
        a = spike_prior_mc(300, 2.0, 1000, seed=9)
        b = spike_prior_mc(300, 2.0, 1000, seed=9, workers=3)
        assert a == b
        assert 0.0 <= a[0] <= 1.0
        assert spike_prior_mc(300, 2.0, 1000, seed=10) != a

    def test_monotone_in_tau(self):
        taus = np.linspace(0.0, 5.0, 11)
        est = spike_prior_mc_grid(200, taus, 2000, seed=4)[:, 0]
        assert np.all(np.diff(est) <= 1e-12)

    def test_grid_matches_single(self):
        single = spike_prior_mc(100, 1.5, 500, seed=2)
        grid = spike_prior_mc_grid(100, [1.5], 500, seed=2)[0]
        assert tuple(grid) == pytest.approx(single, rel=1e-15)

    @pytest.mark.parametrize("n,samples", [(1, 1000), (10, 50)])
    def test_preconditions(self, n, samples):
        with pytest.raises(ValueError):
            spike_prior_mc(n, 1.0, samples)

    def test_tau(self):
        lam = math.sqrt(2 * math.log(1e4))
        assert spike_tau(10**4) == pytest.approx(lam - math.log(lam), rel=1e-15)


class TestBlocks:
    def test_window(self):
        r, n, s = 0.25, 10**5, 10
        bound = independent_blocks_bound(r, n, s, 2000, seed=2)
        ref = s * 0.2 * spike_tau(n // s) ** 2 / (2 * r)
        assert 0.8 <= bound / ref <= 1.05
        assert bound <= asymptotic_minimax(r, n, s).risk_all * 1.05

    def test_tiny_blocks_run(self):
        assert independent_blocks_bound(1.0, 20, 10, 200, seed=1) > 0

    def test_block_size(self):
        with pytest.raises(ValueError):
            independent_blocks_bound(1.0, 10, 6, 200)


class TestLfSubopt:
    def test_ratio(self):
        ratio = lf_suboptimality_check(0.15, 1e-8)
        assert 1.5 <= ratio <= 1 + 1 / 0.15

    def test_sup_ceiling(self):
        p = build_problem(0.15, 1e-8)
        _, top = sup_risk(make_threshold_lf(p), p)
        assert top / p.level <= 1 + 1 / p.r

    def test_r_too_large(self):
        with pytest.raises(ValueError, match="r must lie"):
            lf_suboptimality_check(0.3, 1e-8)
        assert R_LF_LIMIT == pytest.approx(0.2071067811865476)

    def test_eta_too_large(self):
        with pytest.raises(ValueError, match="decrease eta"):
            lf_suboptimality_check(0.2, 1e-10)


class TestGaussianClass:
    def test_zero_rule(self, moderate):
        assert gaussian_class_origin_risk(lambda x: np.zeros_like(x), moderate) == 0.0

    def test_mle(self):
        p = build_problem(1.0, 1e-3)
        assert gaussian_class_origin_risk(MLE(), p) == pytest.approx(ORIGIN_MLE_R1, abs=1e-10)

    def test_hard_threshold(self, sparse):
        val = gaussian_class_origin_risk(HardThreshold(sparse.lambda_e), sparse)
        assert 0 < val <= 10 * sparse.eta * sparse.lambda_e**2 / sparse.r


class TestMultivariate:
    def test_uniform_constant(self):
        n, r = 5, 0.5
        est, se = multivariate_mc_risk(Product((Uniform(r),) * n), np.zeros(n), 20000, seed=1)
        assert abs(est - n / 2 * math.log1p(1 / r)) <= 3 * se

    def test_additivity_small(self, moderate):
        m = make_threshold_cluster(moderate)
        theta = np.array([0.0, moderate.lambda_f, 0.0, 2.0])
        est, se = multivariate_mc_risk(Product((m,) * 4), theta, 40000, seed=2)
        exact = sum(kl_risk(m, t) for t in theta)
        assert abs(est - exact) <= 3 * se

    def test_one_dim(self, moderate):
        m = make_threshold_zero(moderate)
        est, se = multivariate_mc_risk(Product((m,)), np.array([1.0]), 40000, seed=3)
        assert abs(est - kl_risk(m, 1.0)) <= 3 * se

    def test_reproducible(self, moderate):
        m = Product((make_threshold_cluster(moderate),) * 3)
        a = multivariate_mc_risk(m, np.ones(3), 5000, seed=5)
        assert a == multivariate_mc_risk(m, np.ones(3), 5000, seed=5, workers=2)

    def test_dimension(self):
        with pytest.raises(ValueError):
            multivariate_mc_risk(Product((Uniform(1.0),)), np.zeros(2), 100)


class TestOrdering:
    def test_bayes_risk_ordering(self, sparse):
        vals = [bayes_risk_sparse_class(b(sparse), sparse) for b in (make_threshold_cluster, make_threshold_lf, make_threshold_zero)]
        assert vals[0] < vals[1] < vals[2]
