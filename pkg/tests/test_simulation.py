"""Monte Carlo lab: reproducibility, quadrature agreement, coverage shape."""

import math

import numpy as np
import pytest

from bounds_ci.simulation import (
    CI_MA,
    CI_TI,
    CI_TI_UNION,
    ExperimentConfig,
    default_delta_grid,
    quadrature_coverage_curve,
    run_experiment,
    seeded_streams,
)


def _config(**kw):
    base = dict(rho=0.0, alpha=0.05, delta_grid=(-2.0, 0.0, 1.0, 4.0),
                replications=20_000, seed=123)
    base.update(kw)
    return ExperimentConfig(**base)


def _points_by(points, method):
    return {p.delta: p for p in points if p.method == method}


class TestReproducibility:
    def test_same_seed_identical(self):
        a = run_experiment(_config())
        b = run_experiment(_config())
        assert a == b

    def test_different_seed_statistically_close(self):
        a = _points_by(run_experiment(_config(seed=1)), CI_MA)
        b = _points_by(run_experiment(_config(seed=2)), CI_MA)
        for d in a:
            se = math.hypot(a[d].coverage_se, b[d].coverage_se)
            assert abs(a[d].coverage - b[d].coverage) <= 6 * max(se, 1e-6)

    def test_worker_count_invariance(self):
        a = run_experiment(_config(workers=1))
        b = run_experiment(_config(workers=8))
        assert a == b

    def test_streams_distinct(self):
        streams = seeded_streams(7, 16)
        assert len({s.stream_id for s in streams}) == 16
        assert all(s.seed == 7 for s in streams)
        with pytest.raises(ValueError):
            seeded_streams(7, 0)


class TestConfigValidation:
    def test_grid_sorted(self):
        with pytest.raises(ValueError):
            _config(delta_grid=(1.0, 0.0))

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            _config(methods=("CI_MA", "bogus"))

    def test_default_grid(self):
        grid = default_delta_grid()
        assert grid[0] == -4.0 and grid[-1] == 10.0
        assert len(grid) == 57


class TestQuadratureTwin:
    @pytest.mark.parametrize("rho", [0.0, 0.7, -0.7])
    def test_matches_monte_carlo(self, rho):
        grid = (-2.0, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0)
        config = _config(rho=rho, delta_grid=grid, replications=200_000,
                         methods=(CI_MA,), seed=31)
        mc = _points_by(run_experiment(config), CI_MA)
        quad = dict(quadrature_coverage_curve(rho, 0.05, grid))
        for d in grid:
            se = max(mc[d].coverage_se, 1e-6)
            assert quad[d] == pytest.approx(mc[d].coverage, abs=3.5 * se), (rho, d)

    def test_zero_length_floor(self):
        (_, cov), = quadrature_coverage_curve(0.0, 0.05, [0.0])
        assert 0.95 <= cov <= 1.0

    def test_tail_value(self):
        (_, cov), = quadrature_coverage_curve(0.0, 0.05, [40.0])
        assert cov == pytest.approx(0.95, abs=1e-5)

    def test_misspecified_range_floor(self):
        # Coverage of the weighted midpoint never falls below the level.
        curve = quadrature_coverage_curve(0.7, 0.05, [-6.0, -3.0, -1.0])
        for _, cov in curve:
            assert cov >= 0.95 - 1e-9


class TestCoverageShape:
    def test_adaptive_floor_and_ti_undercoverage(self):
        grid = (-2.0, -1.0, 0.0, 0.5, 1.0, 2.0, 6.0)
        config = _config(delta_grid=grid, replications=100_000, seed=5)
        points = run_experiment(config)
        ma = _points_by(points, CI_MA)
        ti = _points_by(points, CI_TI)
        for d in grid:
            assert ma[d].coverage >= 0.95 - 3 * max(ma[d].coverage_se, 1e-6)
        # The test inversion interval undercovers once the bounds cross.
        assert ti[-2.0].coverage < 0.90

    def test_union_never_shorter_than_adaptive(self):
        # With moderate correlation the adaptive interval is contained in
        # the union pathwise, so its expected excess length is weakly
        # smaller at every grid point.
        for rho in (0.0, 0.7, -0.7):
            config = _config(rho=rho, delta_grid=(-2.0, 0.0, 1.0, 3.0),
                             replications=50_000, seed=11)
            points = run_experiment(config)
            ma = _points_by(points, CI_MA)
            union = _points_by(points, CI_TI_UNION)
            for d in ma:
                assert ma[d].expected_excess_length <= union[d].expected_excess_length + 1e-9

    def test_pathological_correlation_dip_with_forced_one_sided_value(self):
        # Forcing the one-sided value at rho = 0.95 loses the floor at some
        # finite length; the solved value restores it.
        grid = tuple(np.arange(0.0, 4.01, 0.5))
        forced = quadrature_coverage_curve(0.95, 0.05, grid, c_override=1.6449)
        assert min(cov for _, cov in forced) < 0.95 - 5e-4
        solved = quadrature_coverage_curve(0.95, 0.05, grid)
        assert min(cov for _, cov in solved) >= 0.95 - 2e-4

    def test_adaptive_equals_bounds_interval_when_ordered(self):
        # For rho <= 0.4 the midpoint interval is contained in the bounds
        # interval whenever the bound estimates are in the expected order.
        from bounds_ci.critical_value import solve_critical_value
        from bounds_ci.normal_kernel import std_normal_quantile

        for rho in (0.0, 0.4):
            c = solve_critical_value(rho, 0.05, rho_known_zero=(rho == 0.0)).c_hat
            half = std_normal_quantile(0.975) * math.sqrt(2 + 2 * rho) / 2.0
            rng = np.random.default_rng(3)
            z1 = rng.standard_normal(200_000)
            z2 = rho * z1 + math.sqrt(1 - rho**2) * rng.standard_normal(200_000)
            for delta in (0.0, 0.5, 2.0):
                tl, tu = z1, delta + z2
                ordered = tl <= tu
                star = 0.5 * (tl + tu)
                inside = ((star - half >= tl - c) & (star + half <= tu + c))
                assert np.all(inside[ordered])
