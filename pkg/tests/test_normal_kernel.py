"""Normal-kernel primitives against frozen high-precision references.

Reference constants were computed with 40-digit arithmetic (mpmath erfc
and root-finding on it) and frozen here; the Monte Carlo rectangle oracle
is recomputed inside the tests.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bounds_ci.normal_kernel import (
    RngStream,
    bivariate_rect_prob,
    sample_bivariate,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
    validate_correlation,
)

from helpers import draw_correlated

# 40-digit references.
PDF_AT_0 = 0.3989422804014327    # 1/sqrt(2 pi)
PDF_AT_1 = 0.2419707245191433
CDF_AT_2 = 0.9772498680518208
CDF_PROD_1 = 0.7078609817371410  # Phi(1)^2
Q_95 = 1.6448536269514722
Q_975 = 1.9599639845400545
Q_995 = 2.5758293035489004


class TestPdf:
    def test_at_zero(self):
        assert std_normal_pdf(0.0) == pytest.approx(PDF_AT_0, rel=1e-15)

    def test_at_one(self):
        assert std_normal_pdf(1.0) == pytest.approx(PDF_AT_1, rel=1e-14)

    @given(st.floats(-10.0, 10.0))
    @settings(max_examples=200, deadline=None)
    def test_symmetry(self, x):
        assert std_normal_pdf(x) == pytest.approx(std_normal_pdf(-x), rel=1e-14, abs=0.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            std_normal_pdf(float("nan"))
        with pytest.raises(ValueError):
            std_normal_pdf(float("inf"))

    def test_vectorized(self):
        out = std_normal_pdf(np.array([0.0, 1.0]))
        assert out.shape == (2,)
        assert out[0] == pytest.approx(PDF_AT_0, rel=1e-15)


class TestCdf:
    def test_at_zero(self):
        assert std_normal_cdf(0.0) == 0.5

    def test_at_two(self):
        assert std_normal_cdf(2.0) == pytest.approx(CDF_AT_2, abs=1e-14)

    def test_one_sided_five_percent_point(self):
        # 1.6449 is the conventional two-decimal one-sided 5% value.
        assert std_normal_cdf(1.6449) == pytest.approx(0.95, abs=1e-4)

    @given(st.floats(-8.0, 8.0))
    @settings(max_examples=200, deadline=None)
    def test_reflection(self, x):
        assert std_normal_cdf(x) + std_normal_cdf(-x) == pytest.approx(1.0, abs=1e-14)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            std_normal_cdf(float("-inf"))


class TestQuantile:
    def test_median(self):
        assert std_normal_quantile(0.5) == 0.0

    def test_reference_points(self):
        assert std_normal_quantile(0.95) == pytest.approx(Q_95, abs=1e-9)
        assert std_normal_quantile(0.975) == pytest.approx(Q_975, abs=1e-9)
        assert std_normal_quantile(0.995) == pytest.approx(Q_995, abs=1e-9)

    @given(st.floats(1e-8, 1.0 - 1e-8))
    @settings(max_examples=300, deadline=None)
    def test_round_trip(self, p):
        assert std_normal_cdf(std_normal_quantile(p)) == pytest.approx(p, abs=1e-10)

    @given(st.floats(1e-4, 0.5))
    @settings(max_examples=200, deadline=None)
    def test_antisymmetry(self, p):
        assert std_normal_quantile(1.0 - p) == pytest.approx(-std_normal_quantile(p), abs=1e-12)

    @given(st.floats(1e-8, 1e-4))
    @settings(max_examples=100, deadline=None)
    def test_antisymmetry_tail(self, p):
        # 1 - p quantizes at 2^-53, which the quantile's conditioning 1/phi
        # amplifies; the identity can only hold up to that floor.
        x = std_normal_quantile(p)
        bound = max(1e-12, 2.0 ** -53 / std_normal_pdf(min(-x, 8.0)))
        assert std_normal_quantile(1.0 - p) == pytest.approx(-x, abs=2 * bound)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.3, float("nan")])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            std_normal_quantile(bad)


class TestCorrelation:
    def test_clamps_within_band(self):
        assert validate_correlation(1.0 + 5e-13) == 1.0
        assert validate_correlation(-1.0 - 5e-13) == -1.0
        assert validate_correlation(0.3) == 0.3

    @pytest.mark.parametrize("bad", [1.0 + 1e-9, -1.5, float("nan"), float("inf")])
    def test_rejects_out_of_band(self, bad):
        with pytest.raises(ValueError):
            validate_correlation(bad)


class TestRectangleProbability:
    def test_whole_plane(self):
        for rho in (-0.9, 0.0, 0.5, 1.0):
            assert bivariate_rect_prob(math.inf, -math.inf, rho) == pytest.approx(1.0, abs=1e-12)

    def test_independence_product(self):
        assert bivariate_rect_prob(1.0, -1.0, 0.0) == pytest.approx(CDF_PROD_1, abs=1e-10)

    def test_zero_rho_factorizes(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            a, b = rng.uniform(-3, 3, size=2)
            expect = std_normal_cdf(a) * (1.0 - std_normal_cdf(b))
            assert bivariate_rect_prob(a, b, 0.0) == pytest.approx(expect, abs=1e-10)

    def test_monte_carlo_oracle(self):
        rng = np.random.default_rng(2024)
        draws = 10_000_000
        z1, z2 = draw_correlated(rng, 0.7, draws)
        mc = float(np.mean((z1 <= 1.0) & (z2 >= -0.5)))
        se = math.sqrt(mc * (1.0 - mc) / draws)
        assert bivariate_rect_prob(1.0, -0.5, 0.7) == pytest.approx(mc, abs=3 * se)

    def test_against_scipy(self):
        from scipy.stats import multivariate_normal

        rng = np.random.default_rng(5)
        for _ in range(12):
            a, b = rng.uniform(-2.5, 2.5, size=2)
            rho = rng.uniform(-0.99, 0.99)
            ref = multivariate_normal(cov=[[1.0, -rho], [-rho, 1.0]]).cdf([a, -b])
            assert bivariate_rect_prob(a, b, rho) == pytest.approx(ref, abs=1e-5)

    @given(
        st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0),
        st.floats(-0.999, 0.999),
    )
    @settings(max_examples=150, deadline=None)
    def test_monotone_in_bounds(self, a1, a2, b, rho):
        lo, hi = min(a1, a2), max(a1, a2)
        assert bivariate_rect_prob(hi, b, rho) >= bivariate_rect_prob(lo, b, rho) - 1e-10
        assert bivariate_rect_prob(lo, b, rho) >= bivariate_rect_prob(lo, b + 0.5, rho) - 1e-10

    @given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.floats(-0.999, 0.999))
    @settings(max_examples=150, deadline=None)
    def test_reflection_exchange(self, a, b, rho):
        # Mapping (Z1, Z2) -> (-Z2, -Z1) preserves the correlation.
        assert bivariate_rect_prob(a, b, rho) == pytest.approx(
            bivariate_rect_prob(-b, -a, rho), abs=1e-10
        )

    def test_degenerate_correlations(self):
        # rho = 1: Z2 = Z1.
        assert bivariate_rect_prob(1.0, -1.0, 1.0) == pytest.approx(
            std_normal_cdf(1.0) - std_normal_cdf(-1.0), abs=1e-14
        )
        assert bivariate_rect_prob(-1.0, 1.0, 1.0) == 0.0
        # rho = -1: Z2 = -Z1.
        assert bivariate_rect_prob(1.0, -2.0, -1.0) == pytest.approx(
            std_normal_cdf(1.0), abs=1e-14
        )
        assert bivariate_rect_prob(3.0, -0.5, -1.0) == pytest.approx(
            std_normal_cdf(0.5), abs=1e-14
        )

    def test_in_unit_interval(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            p = bivariate_rect_prob(rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-1, 1))
            assert 0.0 <= p <= 1.0

    def test_rejects_nan_bounds(self):
        with pytest.raises(ValueError):
            bivariate_rect_prob(float("nan"), 0.0, 0.0)


class TestSampling:
    def test_perfect_correlation_degenerate(self):
        draws = sample_bivariate(1.0, RngStream(seed=1), 1000)
        assert np.array_equal(draws[:, 0], draws[:, 1])
        draws = sample_bivariate(-1.0, RngStream(seed=1), 1000)
        assert np.array_equal(draws[:, 0], -draws[:, 1])

    def test_independence(self):
        draws = sample_bivariate(0.0, RngStream(seed=3), 1_000_000)
        corr = np.corrcoef(draws[:, 0], draws[:, 1])[0, 1]
        assert abs(corr) <= 0.004

    def test_target_correlation(self):
        n = 1_000_000
        draws = sample_bivariate(0.7, RngStream(seed=4), n)
        cov = float(np.mean(draws[:, 0] * draws[:, 1]))
        # Var(Z1 Z2) = 1 + rho^2 for standard normal pairs.
        se = math.sqrt((1.0 + 0.7 ** 2) / n)
        assert cov == pytest.approx(0.7, abs=3 * se)

    def test_stream_determinism(self):
        a = sample_bivariate(0.3, RngStream(seed=9, stream_id=2), 64)
        b = sample_bivariate(0.3, RngStream(seed=9, stream_id=2), 64)
        c = sample_bivariate(0.3, RngStream(seed=9, stream_id=3), 64)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_count_validation(self):
        with pytest.raises(ValueError):
            sample_bivariate(0.0, RngStream(seed=1), 0)

    def test_stream_field_validation(self):
        with pytest.raises(ValueError):
            RngStream(seed=-1)
