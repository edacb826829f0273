import numpy as np
import pytest

from portfolio_lab.correlation import (
    covariance,
    dcca_matrix,
    dcca_pair,
    dpcca_matrix,
    pearson_corr,
)
from portfolio_lab.errors import (
    ConfigurationError,
    DegenerateAssetError,
    InsufficientDataError,
    SingularMatrixError,
)
from portfolio_lab.types import ReturnMatrix


def _brute_force_dcca(x, y, n):
    """Independent oracle: literal Steps I-V with explicit python loops."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    t = len(x)
    xk = np.cumsum(x - x.mean())
    yk = np.cumsum(y - y.mean())
    fxy = fxx = fyy = 0.0
    for j in range(t - n):  # boxes of n+1 points starting at j
        k = np.arange(n + 1.0)
        seg_x = xk[j : j + n + 1]
        seg_y = yk[j : j + n + 1]
        bx = np.polyfit(k, seg_x, 1)
        by = np.polyfit(k, seg_y, 1)
        rx = seg_x - np.polyval(bx, k)
        ry = seg_y - np.polyval(by, k)
        fxy += (rx * ry).sum() / (n + 1)
        fxx += (rx * rx).sum() / (n + 1)
        fyy += (ry * ry).sum() / (n + 1)
    fxy /= t - n
    fxx /= t - n
    fyy /= t - n
    return fxy / np.sqrt(fxx * fyy)


class TestCovariance:
    def test_identical_columns(self):
        col = np.random.default_rng(0).normal(size=50)
        cov = covariance(np.stack([col, col], axis=1))
        assert cov.values[0, 1] == pytest.approx(cov.values[0, 0])

    def test_constant_column_zero_row(self):
        data = np.stack([np.full(20, 0.5), np.random.default_rng(1).normal(size=20)], axis=1)
        cov = covariance(data)
        assert cov.values[0, 0] == pytest.approx(0.0, abs=1e-15)
        assert cov.values[0, 1] == pytest.approx(0.0, abs=1e-15)

    def test_hand_example_denominator(self):
        data = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        cov = covariance(data)
        assert cov.values[0, 1] == pytest.approx(2.0)  # sum of cross-dev 4 over T-1 = 2

    def test_shift_invariance(self):
        rng = np.random.default_rng(2)
        data = rng.normal(size=(40, 3))
        shifted = data + np.array([10.0, -3.0, 0.25])
        assert np.allclose(covariance(data).values, covariance(shifted).values, rtol=1e-10)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            covariance(np.ones((1, 3)))


class TestPearson:
    def test_diagonal_cov_gives_identity(self):
        corr = pearson_corr(covariance(np.random.default_rng(3).normal(size=(100, 2)) * [1.0, 5.0]))
        assert np.allclose(np.diag(corr.values), 1.0)

    def test_hand_cov(self):
        from portfolio_lab.correlation import CovarianceMatrix

        corr = pearson_corr(CovarianceMatrix(np.array([[4.0, 2.0], [2.0, 4.0]])))
        assert corr.values[0, 1] == pytest.approx(0.5)

    def test_zero_variance_degenerate(self):
        data = np.stack([np.full(30, 0.1), np.random.default_rng(4).normal(size=30)], axis=1)
        with pytest.raises(DegenerateAssetError):
            pearson_corr(covariance(data))


class TestDccaPair:
    def test_self_correlation_exactly_one(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            x = rng.normal(size=300)
            assert abs(dcca_pair(x, x, 20) - 1.0) < 1e-12

    def test_sign_flip_minus_one(self):
        x = np.random.default_rng(6).normal(size=300)
        assert abs(dcca_pair(x, -x, 20) + 1.0) < 1e-12

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=120)
        y = 0.5 * x + rng.normal(size=120)
        for n in (5, 10, 30):
            assert dcca_pair(x, y, n) == pytest.approx(_brute_force_dcca(x, y, n), abs=1e-10)

    def test_independent_series_small_coefficient(self):
        # |rho| < 0.15 in at least 95% of 100 seeded trials (T=2000, n=60)
        hits = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            x = rng.normal(size=2000)
            y = rng.normal(size=2000)
            if abs(dcca_pair(x, y, 60)) < 0.15:
                hits += 1
        assert hits >= 95

    def test_symmetry_and_scale_invariance(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=200)
        y = rng.normal(size=200) + 0.3 * x
        c = dcca_pair(x, y, 10)
        assert dcca_pair(y, x, 10) == pytest.approx(c, abs=1e-12)
        assert dcca_pair(3.0 * x, 0.5 * y, 10) == pytest.approx(c, rel=1e-9)
        assert dcca_pair(-2.0 * x, 0.5 * y, 10) == pytest.approx(-c, rel=1e-9)

    def test_degenerate_constant_series(self):
        x = np.random.default_rng(9).normal(size=100)
        with pytest.raises(DegenerateAssetError):
            dcca_pair(x, np.full(100, 0.25), 10)

    def test_box_length_validation(self):
        x = np.random.default_rng(10).normal(size=100)
        with pytest.raises(ConfigurationError):
            dcca_pair(x, x, 1)


class TestDccaMatrix:
    def test_identical_columns_all_ones(self):
        col = np.random.default_rng(11).normal(size=200)
        mat = dcca_matrix(np.stack([col, col], axis=1), 15)
        assert np.allclose(mat.values, 1.0)

    def test_symmetric_and_consistent_with_pair(self):
        rng = np.random.default_rng(12)
        data = rng.normal(size=(300, 4))
        mat = dcca_matrix(data, 25)
        assert np.array_equal(mat.values, mat.values.T)
        for i in range(4):
            for j in range(i + 1, 4):
                assert mat.values[i, j] == pytest.approx(
                    dcca_pair(data[:, i], data[:, j], 25), abs=1e-12
                )

    def test_window_boundary(self):
        data = np.random.default_rng(13).normal(size=(60, 3))
        with pytest.raises(InsufficientDataError):
            dcca_matrix(data, 60)

    def test_degenerate_asset_named(self):
        rng = np.random.default_rng(14)
        data = np.stack([rng.normal(size=100), np.zeros(100)], axis=1)
        window = ReturnMatrix(data, ("GOOD", "FLAT"))
        with pytest.raises(DegenerateAssetError, match="FLAT"):
            dcca_matrix(window, 10)


class TestDpcca:
    def test_two_assets_equals_dcca(self):
        rng = np.random.default_rng(15)
        for seed in range(5):
            rng = np.random.default_rng(seed)
            x = rng.normal(size=400)
            y = 0.4 * x + rng.normal(size=400)
            data = np.stack([x, y], axis=1)
            d = dcca_matrix(data, 30).values
            p = dpcca_matrix(data, 30).values
            assert np.allclose(d, p, atol=1e-9)

    def test_identity_dcca_gives_zero_partials(self):
        # three mutually independent series: partials near zero
        rng = np.random.default_rng(16)
        data = rng.normal(size=(3000, 3))
        p = dpcca_matrix(data, 20).values
        off = p[~np.eye(3, dtype=bool)]
        assert np.all(np.abs(off) < 0.15)
        assert np.allclose(np.diag(p), 1.0)

    def test_partial_removes_indirect_link(self):
        # z drives x and y; the direct x-y partial correlation should be far
        # below the raw DCCA correlation
        rng = np.random.default_rng(17)
        z = rng.normal(size=4000)
        x = z + 0.3 * rng.normal(size=4000)
        y = z + 0.3 * rng.normal(size=4000)
        data = np.stack([x, y, z], axis=1)
        raw = dcca_matrix(data, 30).values[0, 1]
        part = dpcca_matrix(data, 30).values[0, 1]
        assert raw > 0.75
        assert part < raw - 0.3

    def test_rank_deficient_raises(self):
        col = np.random.default_rng(18).normal(size=200)
        data = np.stack([col, col, col], axis=1)  # DCCA matrix all ones
        with pytest.raises(SingularMatrixError):
            dpcca_matrix(data, 15)
