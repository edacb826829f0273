import math

import numpy as np
import pytest

from portfolio_lab.errors import (
    ConfigurationError,
    DegenerateAssetError,
    InsufficientDataError,
    UndefinedMetricError,
)
from portfolio_lab.metrics import (
    compound_log_return,
    cvar_historical,
    diversification_ratio,
    improvement,
    nhhi,
    portfolio_variance,
    risk_contribution,
    sharpe_ratio,
    var_historical,
)


class TestPortfolioVariance:
    def test_single_asset_picks_diagonal(self):
        cov = np.diag([0.04, 0.09])
        assert portfolio_variance([1.0, 0.0], cov) == 0.04

    def test_hand_example_unit_comonotone(self):
        assert portfolio_variance([0.5, 0.5], np.ones((2, 2))) == pytest.approx(1.0)

    def test_zero_covariance(self):
        assert portfolio_variance([0.3, 0.7], np.zeros((2, 2))) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigurationError):
            portfolio_variance([0.5, 0.5], np.zeros((3, 3)))


class TestRiskContribution:
    def test_single_asset_portfolio(self):
        cov = np.diag([0.04, 0.09])
        rc = risk_contribution([1.0, 0.0], cov)
        assert rc[0] == pytest.approx(0.2)  # sigma_1
        assert rc[1] == 0.0

    def test_equal_weights_identity_n4(self):
        rc = risk_contribution(np.full(4, 0.25), np.eye(4))
        # PV = 0.25, each RC = 0.25 * 0.25 / 0.5 = 0.125, sum = sqrt(PV) = 0.5
        assert np.allclose(rc, 0.125)
        assert rc.sum() == pytest.approx(0.5)

    def test_euler_identity_random_instances(self):
        rng = np.random.default_rng(123)
        for _ in range(100):
            n = int(rng.integers(2, 8))
            a = rng.normal(size=(n, n))
            cov = a @ a.T + 0.1 * np.eye(n)
            w = rng.uniform(0.01, 1.0, n)
            w /= w.sum()
            rc = risk_contribution(w, cov)
            assert abs(rc.sum() - math.sqrt(portfolio_variance(w, cov))) < 1e-10

    def test_zero_variance_degenerate(self):
        with pytest.raises(DegenerateAssetError):
            risk_contribution([0.5, 0.5], np.zeros((2, 2)))


class TestDiversificationRatio:
    def test_single_asset_is_one(self):
        assert diversification_ratio([1.0, 0.0], np.diag([0.04, 0.09])) == pytest.approx(1.0)

    def test_two_uncorrelated_equal_vol(self):
        dr = diversification_ratio([0.5, 0.5], np.diag([0.04, 0.04]))
        assert dr == pytest.approx(math.sqrt(2.0))

    def test_perfect_correlation_gives_one(self):
        sigma = np.array([0.1, 0.3, 0.2])
        cov = np.outer(sigma, sigma)  # rho = 1 everywhere
        for w in ([0.2, 0.3, 0.5], [0.9, 0.05, 0.05]):
            assert diversification_ratio(w, cov) == pytest.approx(1.0, abs=1e-9)

    def test_long_only_floor(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a = rng.normal(size=(4, 4))
            cov = a @ a.T + 0.05 * np.eye(4)
            w = rng.uniform(0.0, 1.0, 4)
            w /= w.sum()
            assert diversification_ratio(w, cov) >= 1.0 - 1e-9


class TestNhhi:
    def test_equal_weights_zero(self):
        assert nhhi(np.full(8, 0.125)) == pytest.approx(0.0, abs=1e-12)

    def test_single_asset_one(self):
        assert nhhi([0.0, 0.0, 1.0]) == pytest.approx(1.0)

    def test_hand_example(self):
        # HHI = 0.5625 + 0.0625 = 0.625 -> (0.625 - 0.5) / 0.5 = 0.25
        assert nhhi([0.75, 0.25]) == pytest.approx(0.25)

    def test_permutation_invariant_and_minimized_at_equal(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            w = rng.uniform(0.01, 1.0, 6)
            w /= w.sum()
            assert nhhi(w) == pytest.approx(nhhi(w[rng.permutation(6)]))
            assert nhhi(w) >= nhhi(np.full(6, 1 / 6)) - 1e-12

    def test_single_asset_undefined(self):
        with pytest.raises(UndefinedMetricError):
            nhhi([1.0])


class TestSharpeRatio:
    def test_direct_division(self):
        rng = np.random.default_rng(11)
        r = rng.normal(0.1, 0.2, 5000)
        expected = (r.mean() - 0.0) / r.std(ddof=1)
        assert sharpe_ratio(r) == pytest.approx(expected)

    def test_constant_series_degenerate(self):
        with pytest.raises(DegenerateAssetError):
            sharpe_ratio(np.full(10, 0.01))

    def test_antisymmetry(self):
        r = np.array([0.01, -0.02, 0.03, 0.005])
        assert sharpe_ratio(-r) == pytest.approx(-sharpe_ratio(r))


FIVE = np.array([-0.10, -0.05, 0.0, 0.05, 0.10])


class TestVarCvar:
    def test_lower_quantile_alpha_005(self):
        # index floor(0.05 * 4) = 0 -> worst return
        assert var_historical(FIVE, 0.05) == pytest.approx(0.10)

    def test_all_gains_gives_negative_var(self):
        assert var_historical(np.array([0.01, 0.02, 0.03]), 0.05) <= 0.0

    def test_quantile_convention_alpha_02(self):
        # index floor(0.2 * 4) = 0 -> still the worst return
        assert var_historical(FIVE, 0.2) == pytest.approx(0.10)

    def test_cvar_hand_example(self):
        # alpha=0.4: index floor(0.4 * 4) = 1, VaR = 0.05, tail {-0.10, -0.05}
        assert var_historical(FIVE, 0.4) == pytest.approx(0.05)
        assert cvar_historical(FIVE, 0.4) == pytest.approx(0.075)

    def test_single_point_tail(self):
        assert cvar_historical(FIVE, 0.05) == pytest.approx(var_historical(FIVE, 0.05))

    def test_identical_returns(self):
        r = np.full(30, -0.02)
        assert var_historical(r, 0.1) == pytest.approx(0.02)
        assert cvar_historical(r, 0.1) == pytest.approx(0.02)

    def test_cvar_dominates_var(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            r = rng.normal(0, 0.05, 200)
            assert cvar_historical(r, 0.05) >= var_historical(r, 0.05) - 1e-15

    def test_empty_series(self):
        with pytest.raises(InsufficientDataError):
            var_historical(np.array([]), 0.05)


class TestCompoundLogReturn:
    def test_zeros(self):
        assert compound_log_return(np.zeros(10)) == 0.0

    def test_constant_closed_form(self):
        assert compound_log_return(np.full(7, 0.02)) == pytest.approx(7 * math.log(1.02))

    def test_inverse_pair_cancels(self):
        assert compound_log_return([0.1, -1.0 / 11.0]) == pytest.approx(0.0, abs=1e-15)

    def test_concatenation_additivity(self):
        rng = np.random.default_rng(17)
        a = rng.uniform(-0.5, 0.5, 40)
        b = rng.uniform(-0.5, 0.5, 25)
        assert compound_log_return(np.concatenate([a, b])) == pytest.approx(
            compound_log_return(a) + compound_log_return(b)
        )

    def test_domain_error(self):
        with pytest.raises(UndefinedMetricError):
            compound_log_return([0.1, -1.0])


class TestImprovement:
    def test_doubling(self):
        assert improvement(0.02, 0.01) == pytest.approx(1.0)

    def test_identity_zero(self):
        assert improvement(0.013, 0.013) == 0.0

    def test_negative_baseline_absolute_denominator(self):
        assert improvement(0.01, -0.01) == pytest.approx(2.0)

    def test_zero_baseline(self):
        with pytest.raises(UndefinedMetricError):
            improvement(0.01, 0.0)
