"""Construction of the adaptive interval and the test-inversion baseline.

Given estimates of a lower and an upper bound with standard errors and a
correlation, this module builds:

* the bounds interval expanded by the solved critical value,
* the two-sided interval around the precision-weighted midpoint,
* their union (the adaptive interval, never empty), and
* a test-inversion baseline that inverts the max studentized violation
  with a Wald pre-test and Bonferroni size accounting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .critical_value import set_coverage_critical_value, solve_critical_value
from .normal_kernel import (
    bivariate_rect_prob,
    std_normal_quantile,
    validate_correlation,
)

__all__ = [
    "InferenceProblem",
    "Interval",
    "IntervalReport",
    "POINT_COVERAGE",
    "SET_COVERAGE",
    "pseudo_true",
    "sigma_star",
    "build_ci_ma",
    "build_ci_ti",
    "build_ci_ti_union",
    "relative_excess_length",
    "ti_critical_values",
]

POINT_COVERAGE = "point_coverage"
SET_COVERAGE = "set_coverage"

# Standard errors below this are rejected as malformed input rather than
# silently producing astronomical studentizations.
_MIN_SE = 1e-12


@dataclass(frozen=True)
class InferenceProblem:
    """One bound-pair inference instance, in outcome units.

    ``theta_L_hat > theta_U_hat`` (crossed bounds) is permitted and is a
    central use case. ``rho_known_zero`` asserts prior knowledge that the
    bound estimators are uncorrelated, e.g. a between-subjects design.
    """

    theta_L_hat: float
    theta_U_hat: float
    se_L: float
    se_U: float
    rho_hat: float = 0.0
    alpha: float = 0.05
    rho_known_zero: bool = False
    label: str = ""

    def __post_init__(self) -> None:
        for name in ("theta_L_hat", "theta_U_hat"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        for name in ("se_L", "se_U"):
            se = getattr(self, name)
            if not (math.isfinite(se) and se > _MIN_SE):
                raise ValueError(f"nonpositive standard error: {name}={se!r}")
        if not 0.0 < self.alpha < 0.5:
            raise ValueError(f"alpha must lie in (0, 0.5), got {self.alpha!r}")
        object.__setattr__(self, "rho_hat", validate_correlation(self.rho_hat))

    @property
    def delta_hat(self) -> float:
        """Estimated interval length (negative when bounds cross)."""
        return self.theta_U_hat - self.theta_L_hat


@dataclass(frozen=True)
class Interval:
    """A closed interval; ``empty`` intervals keep their crossing endpoints.

    For an empty interval ``lower > upper`` and the two values record where
    the construction crossed, which the reports surface as a diagnostic.
    """

    lower: float
    upper: float
    empty: bool = False

    @classmethod
    def from_endpoints(cls, lower: float, upper: float) -> "Interval":
        return cls(lower=lower, upper=upper, empty=lower > upper)

    @property
    def length(self) -> float:
        return 0.0 if self.empty else self.upper - self.lower

    def contains(self, x: float) -> bool:
        return (not self.empty) and self.lower <= x <= self.upper


@dataclass(frozen=True)
class IntervalReport:
    """The adaptive interval plus its components and diagnostics."""

    ci_ma: Interval
    ci_theta_set: Interval
    ci_pseudo: Interval
    theta_star_hat: float
    sigma_star_se: float
    c_hat: float
    mode: str = POINT_COVERAGE
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "mode": self.mode,
            "c_hat": self.c_hat,
            "theta_star_hat": self.theta_star_hat,
            "sigma_star_se": self.sigma_star_se,
            "ci_ma": {"lower": self.ci_ma.lower, "upper": self.ci_ma.upper},
            "ci_theta_set": {
                "lower": self.ci_theta_set.lower,
                "upper": self.ci_theta_set.upper,
                "empty": self.ci_theta_set.empty,
            },
            "ci_pseudo": {"lower": self.ci_pseudo.lower, "upper": self.ci_pseudo.upper},
        }


def pseudo_true(theta_L: float, theta_U: float, sigma_L: float, sigma_U: float) -> float:
    """Precision-weighted average (sigma_U theta_L + sigma_L theta_U) / (sigma_L + sigma_U).

    This is the point targeted by the max studentized violation statistic
    when the bounds cross; it always lies weakly between the two bounds.
    """
    if sigma_L <= 0.0 or sigma_U <= 0.0:
        raise ValueError("sigma_L and sigma_U must be strictly positive")
    return (sigma_U * theta_L + sigma_L * theta_U) / (sigma_L + sigma_U)


def sigma_star(sigma_L: float, sigma_U: float, rho: float) -> float:
    """Standard deviation of the weighted average: sigma_L sigma_U sqrt(2 + 2 rho) / (sigma_L + sigma_U).

    Degree-1 homogeneous in the sigmas, so feeding standard errors returns
    the standard error of the weighted average directly. Zero only at
    rho = -1.
    """
    if sigma_L <= 0.0 or sigma_U <= 0.0:
        raise ValueError("sigma_L and sigma_U must be strictly positive")
    rho = validate_correlation(rho)
    return sigma_L * sigma_U * math.sqrt(2.0 + 2.0 * rho) / (sigma_L + sigma_U)


def build_ci_ma(
    problem: InferenceProblem,
    c_override: float | None = None,
    mode: str = POINT_COVERAGE,
) -> IntervalReport:
    """Build the adaptive interval: bounds interval union midpoint interval.

    The critical value comes from :func:`solve_critical_value` (honoring a
    known-zero correlation), from ``Phi^{-1}(1 - alpha/2)`` in set-coverage
    mode, or from ``c_override`` (expert use: reproducing profile variants
    without re-solving). The union is a single contiguous interval because
    the weighted midpoint always falls inside a nonempty bounds interval.
    """
    if mode not in (POINT_COVERAGE, SET_COVERAGE):
        raise ValueError(f"unknown coverage mode {mode!r}")
    if mode == SET_COVERAGE:
        c_hat = set_coverage_critical_value(problem.alpha)
    elif c_override is not None:
        if not (math.isfinite(c_override) and c_override > 0.0):
            raise ValueError(f"c_override must be a positive real, got {c_override!r}")
        c_hat = float(c_override)
    else:
        c_hat = solve_critical_value(
            problem.rho_hat, problem.alpha, rho_known_zero=problem.rho_known_zero
        ).c_hat

    ci_theta = Interval.from_endpoints(
        problem.theta_L_hat - problem.se_L * c_hat,
        problem.theta_U_hat + problem.se_U * c_hat,
    )
    theta_star = pseudo_true(problem.theta_L_hat, problem.theta_U_hat,
                             problem.se_L, problem.se_U)
    star_se = sigma_star(problem.se_L, problem.se_U, problem.rho_hat)
    q = std_normal_quantile(1.0 - problem.alpha / 2.0)
    ci_pseudo = Interval.from_endpoints(theta_star - star_se * q, theta_star + star_se * q)

    if ci_theta.empty:
        ci_ma = ci_pseudo
    else:
        ci_ma = Interval.from_endpoints(
            min(ci_theta.lower, ci_pseudo.lower),
            max(ci_theta.upper, ci_pseudo.upper),
        )
    return IntervalReport(
        ci_ma=ci_ma,
        ci_theta_set=ci_theta,
        ci_pseudo=ci_pseudo,
        theta_star_hat=theta_star,
        sigma_star_se=star_se,
        c_hat=c_hat,
        mode=mode,
        label=problem.label,
    )


@lru_cache(maxsize=256)
def ti_critical_values(rho: float, alpha: float) -> tuple[float, float, float]:
    """Pre-test and second-stage critical values of the test-inversion baseline.

    Returns ``(z_pretest, cv_one, cv_both)``:

    * ``z_pretest = Phi^{-1}(1 - 0.1 alpha)``, the one-sided Wald cut that
      discards a clearly slack constraint;
    * ``cv_one = Phi^{-1}(1 - 0.9 alpha)``, used when one constraint
      survives;
    * ``cv_both``, the (1 - 0.9 alpha) quantile of max(Z1, -Z2), found by
      bisection on the rectangle probability P(Z1 <= c, Z2 >= -c).

    The 0.1/0.9 split is the Bonferroni accounting for the pre-test.
    """
    rho = validate_correlation(rho)
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha!r}")
    z_pre = std_normal_quantile(1.0 - 0.1 * alpha)
    cv_one = std_normal_quantile(1.0 - 0.9 * alpha)
    target = 1.0 - 0.9 * alpha
    lo, hi = 0.0, 10.0
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if bivariate_rect_prob(mid, -mid, rho) < target:
            lo = mid
        else:
            hi = mid
    return z_pre, cv_one, 0.5 * (lo + hi)


def _ti_endpoints(theta_L, theta_U, se_L, se_U, z_pre, cv_one, cv_both):
    """Closed-form endpoints of the test-inversion interval (vectorized).

    On each side the acceptance boundary is set by ``cv_both`` while both
    constraints survive the pre-test, by ``cv_one`` once the far constraint
    is discarded as slack, and by the retention boundary itself in the
    narrow window where the critical-value jump swallows the crossing.
    Returns ``(lower, upper)``; the interval is empty where lower > upper.
    """
    lower = np.maximum(
        theta_L - cv_both * se_L,
        np.minimum(theta_L - cv_one * se_L, theta_U - z_pre * se_U),
    )
    upper = np.minimum(
        theta_U + cv_both * se_U,
        np.maximum(theta_U + cv_one * se_U, theta_L + z_pre * se_L),
    )
    return lower, upper


def _default_ti_grid(problem: InferenceProblem) -> tuple[float, float, float]:
    # Spanning the hull of the two estimates (not just the weighted
    # midpoint) keeps the acceptance region inside the grid even for very
    # wide estimated intervals.
    margin = 10.0 * max(problem.se_L, problem.se_U)
    lo = min(problem.theta_L_hat, problem.theta_U_hat) - margin
    hi = max(problem.theta_L_hat, problem.theta_U_hat) + margin
    step = min(problem.se_L, problem.se_U) / 50.0
    return lo, hi, step


def build_ci_ti(
    problem: InferenceProblem,
    grid_spec: tuple[float, float, float] | None = None,
) -> Interval:
    """Test-inversion interval: grid points where the max studentized violation is accepted.

    The statistic is ``T(theta) = max((theta_L_hat - theta)/se_L,
    (theta - theta_U_hat)/se_U, 0)`` and the critical value at each theta
    follows the pre-test described in :func:`ti_critical_values`. With no
    constraint retained there is nothing to test (the point sits deep
    inside the estimated bounds, where T = 0), so such points are accepted.
    The acceptance boundary is bisected between the bracketing grid points,
    so the returned endpoints do not carry the grid's quantization. An
    empty result is the embedded specification rejection; its diagnostic
    endpoints collapse to the weighted midpoint, where the statistic is
    minimized.
    """
    lo_req, hi_req, step_req = _default_ti_grid(problem)
    if grid_spec is None:
        lo, hi, step = lo_req, hi_req, step_req
    else:
        lo, hi, step = grid_spec
        if lo > lo_req or hi < hi_req or step > step_req + 1e-15:
            raise ValueError(
                "grid must cover both bound estimates +- 10 max(se) "
                "at a step no coarser than min(se)/50"
            )
    grid = np.arange(lo, hi + step / 2.0, step)
    z_pre, cv_one, cv_both = ti_critical_values(problem.rho_hat, problem.alpha)

    def accepted_at(theta):
        t_stat = np.maximum.reduce([
            (problem.theta_L_hat - theta) / problem.se_L,
            (theta - problem.theta_U_hat) / problem.se_U,
            np.zeros_like(theta),
        ])
        retain_L = (theta - problem.theta_L_hat) / problem.se_L <= z_pre
        retain_U = (problem.theta_U_hat - theta) / problem.se_U <= z_pre
        cv = np.where(retain_L & retain_U, cv_both, cv_one)
        return t_stat <= cv

    accepted = accepted_at(grid)
    idx = np.flatnonzero(accepted)
    if idx.size == 0:
        theta_star = pseudo_true(problem.theta_L_hat, problem.theta_U_hat,
                                 problem.se_L, problem.se_U)
        return Interval(lower=theta_star, upper=theta_star, empty=True)
    if not np.all(np.diff(idx) == 1):
        raise AssertionError("test-inversion acceptance region is not contiguous")

    def refine(inside: float, outside: float) -> float:
        # The decision is monotone moving inward, so bisect the boundary
        # between the last rejected and first accepted grid points.
        for _ in range(60):
            mid = 0.5 * (inside + outside)
            if accepted_at(np.asarray(mid)):
                inside = mid
            else:
                outside = mid
        return inside

    lower = float(grid[idx[0]])
    if idx[0] > 0:
        lower = refine(lower, float(grid[idx[0] - 1]))
    upper = float(grid[idx[-1]])
    if idx[-1] < grid.size - 1:
        upper = refine(upper, float(grid[idx[-1] + 1]))
    return Interval.from_endpoints(lower, upper)


def build_ci_ti_union(
    problem: InferenceProblem,
    grid_spec: tuple[float, float, float] | None = None,
) -> Interval:
    """Union of the test-inversion interval with the midpoint interval.

    Never empty: when the test inversion rejects everywhere the union is
    just the midpoint interval. Reported as the convex hull, which
    coincides with the union whenever the two pieces overlap (they do in
    all nondegenerate configurations).
    """
    ti = build_ci_ti(problem, grid_spec)
    theta_star = pseudo_true(problem.theta_L_hat, problem.theta_U_hat,
                             problem.se_L, problem.se_U)
    star_se = sigma_star(problem.se_L, problem.se_U, problem.rho_hat)
    half = star_se * std_normal_quantile(1.0 - problem.alpha / 2.0)
    pseudo = Interval.from_endpoints(theta_star - half, theta_star + half)
    if ti.empty:
        return pseudo
    return Interval.from_endpoints(min(ti.lower, pseudo.lower), max(ti.upper, pseudo.upper))


def relative_excess_length(ci_a: Interval, ci_b: Interval, delta_hat: float) -> float:
    """Ratio of the two intervals' lengths beyond max(delta_hat, 0).

    The benchmark length max(delta_hat, 0) is the estimated identified-set
    length, so the ratio compares only the inferential padding.
    """
    if ci_a.empty or ci_b.empty:
        raise ValueError("relative excess length requires nonempty intervals")
    base = max(delta_hat, 0.0)
    num = ci_a.length - base
    den = ci_b.length - base
    if den <= 0.0 or num <= 0.0:
        raise ValueError(
            f"excess lengths must be positive (got numerator {num!r}, denominator {den!r})"
        )
    return num / den
