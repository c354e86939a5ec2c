"""Standard-error recovery from published interval endpoints."""

import pytest

from bounds_ci.backout import (
    ReferenceRow,
    backout_standard_errors,
    load_reference_table,
)
from bounds_ci.intervals import build_ci_ma
from bounds_ci.normal_kernel import std_normal_quantile

Q95 = std_normal_quantile(0.95)


class TestReferenceTable:
    def test_bundled_fixture_loads(self):
        rows = load_reference_table()
        assert len(rows) == 9
        labels = [r.label for r in rows]
        assert "Ambiguity Aversion" in labels
        inverted = [r for r in rows if r.flags == "*"]
        assert len(inverted) == 1
        assert inverted[0].theta_L > inverted[0].theta_U
        near_point = [r for r in rows if r.flags == "**"]
        assert len(near_point) == 2


class TestBackout:
    def test_dominated_row_closed_form(self):
        rows = load_reference_table()
        row = next(r for r in rows if r.label == "Ambiguity Aversion")
        (result,) = backout_standard_errors([row])
        assert result.ok
        assert result.problem.se_L == pytest.approx((0.499 - 0.459) / Q95, abs=1e-9)
        assert result.problem.se_U == pytest.approx((0.597 - 0.557) / Q95, abs=1e-9)

    def test_inverted_row_equal_scales(self):
        rows = load_reference_table()
        row = next(r for r in rows if r.flags == "*")
        (result,) = backout_standard_errors([row])
        assert result.ok
        # The published interval is symmetric about the midpoint of the two
        # estimates, which pins the standard errors to be equal.
        assert result.problem.se_L == pytest.approx(result.problem.se_U, abs=1e-6)

    def test_round_trip_reproduces_endpoints(self):
        results = backout_standard_errors(load_reference_table())
        assert all(r.ok for r in results)
        for r in results:
            rep = build_ci_ma(r.problem)
            assert rep.ci_ma.lower == pytest.approx(r.row.ci_ma_lo, abs=1e-3)
            assert rep.ci_ma.upper == pytest.approx(r.row.ci_ma_hi, abs=1e-3)

    def test_infeasible_row_flagged(self):
        row = ReferenceRow(label="bogus", theta_L=0.0, theta_U=10.0,
                           ci_ma_lo=4.0, ci_ma_hi=6.0,
                           ci_ti_lo=4.0, ci_ti_hi=6.0, rel_length=1.0)
        (result,) = backout_standard_errors([row])
        assert not result.ok
        assert result.problem is None
        assert result.reason
