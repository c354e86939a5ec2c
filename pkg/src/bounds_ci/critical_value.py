"""Solve the worst-case coverage equation for the bounds-interval critical value.

For a given correlation and level, the critical value is the unique c at
which the infimum (over nonnegative interval lengths) of the coverage
objective equals the nominal level. The objective's infimum is monotone
nondecreasing in c, so the solver brackets c between the one-sided and
two-sided normal quantiles and bisects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .coverage_engine import DEFAULT_GRID_SPEC, delta_profile
from .normal_kernel import DEGENERATE_RHO_TOL, std_normal_quantile, validate_correlation

__all__ = [
    "CriticalValueResult",
    "SolverError",
    "Table1Cell",
    "solve_critical_value",
    "generate_table1",
    "set_coverage_critical_value",
    "one_sided_shortcut_applies",
    "METHOD_SHORTCUT",
    "METHOD_SOLVED",
    "METHOD_DEGENERATE",
]

METHOD_SHORTCUT = "shortcut_one_sided"
METHOD_SOLVED = "solved"
METHOD_DEGENERATE = "degenerate_two_sided"

# Bisection runs until the c-bracket is this narrow. The coverage objective
# can be locally flat in c at large rho, so a pure coverage-tolerance stop
# would leave c imprecise; converging the bracket gives both c and coverage
# precision (the infimum's slope in c never exceeds ~0.5).
_C_BRACKET_TOL = 1e-5
_MAX_ITERATIONS = 200


class SolverError(RuntimeError):
    """Bisection failed to converge; carries the (c, infimum) trace."""

    def __init__(self, message: str, trace: list[tuple[float, float]]):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class CriticalValueResult:
    c_hat: float
    infimal_coverage: float
    argmin_delta: float
    method: str
    iterations: int


@dataclass(frozen=True)
class Table1Cell:
    rho: float
    alpha: float
    c_hat: float
    c_rounded: float
    infimal_coverage: float
    argmin_delta: float


def one_sided_shortcut_applies(alpha: float) -> bool:
    """Whether known-zero correlation licenses the plain one-sided quantile.

    True when sqrt(2) * Phi^{-1}(1 - alpha) >= Phi^{-1}(1 - alpha/2), which
    holds for alpha < .14, i.e. coverage levels of 86% or higher.
    """
    return math.sqrt(2.0) * std_normal_quantile(1.0 - alpha) >= std_normal_quantile(
        1.0 - alpha / 2.0
    )


def set_coverage_critical_value(alpha: float) -> float:
    """Critical value for covering the whole identified set: Phi^{-1}(1 - alpha/2)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return std_normal_quantile(1.0 - alpha / 2.0)


@lru_cache(maxsize=256)
def solve_critical_value(
    rho: float,
    alpha: float,
    rho_known_zero: bool = False,
    tol: float = 1e-4,
    grid_spec: tuple[float, float] = DEFAULT_GRID_SPEC,
) -> CriticalValueResult:
    """Critical value for the bounds interval at correlation ``rho`` and level ``alpha``.

    Pure in its arguments and memoized; repeated batch construction with a
    shared (rho, alpha) pays for one solve.

    Parameters
    ----------
    rho : float
        Correlation of the two bound estimators (an estimate is fine).
    alpha : float
        Nominal level, restricted to (0, 0.5).
    rho_known_zero : bool
        Set only when zero correlation is known a priori (e.g. bounds
        estimated from distinct subsamples). For conventional levels this
        licenses the one-sided quantile without solving. It is a knowledge
        claim: an estimated rho of exactly zero should still be solved
        numerically (the results agree within tolerance).
    tol : float
        Coverage tolerance of the solved root (default 1e-4).

    Raises
    ------
    ValueError
        If ``alpha`` is not in (0, 0.5).
    SolverError
        If bisection fails to converge within 200 iterations.
    """
    rho = validate_correlation(rho)
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"unsupported level: alpha must lie in (0, 0.5), got {alpha!r}")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")

    one_sided = std_normal_quantile(1.0 - alpha)
    two_sided = std_normal_quantile(1.0 - alpha / 2.0)

    if rho_known_zero and one_sided_shortcut_applies(alpha):
        return CriticalValueResult(
            c_hat=one_sided,
            infimal_coverage=1.0 - alpha,
            argmin_delta=math.inf,
            method=METHOD_SHORTCUT,
            iterations=0,
        )
    if rho >= 1.0 - DEGENERATE_RHO_TOL:
        # Perfectly correlated estimators: the two-sided quantile solves the
        # equation exactly.
        return CriticalValueResult(
            c_hat=two_sided,
            infimal_coverage=1.0 - alpha,
            argmin_delta=math.inf,
            method=METHOD_DEGENERATE,
            iterations=0,
        )

    target = 1.0 - alpha
    trace: list[tuple[float, float]] = []

    def infimum(c: float) -> tuple[float, float]:
        prof = delta_profile(c, rho, alpha, grid_spec)
        trace.append((c, prof.infimum))
        return prof.infimum, prof.argmin_delta

    lo, hi = one_sided, two_sided
    c_tol = min(_C_BRACKET_TOL, tol)
    inf_lo, arg_lo = infimum(lo)
    iterations = 1
    # The infimum at the one-sided quantile never exceeds the target (the
    # tail limit equals it exactly); when it attains it, lo is the root.
    if inf_lo >= target - 1e-12:
        return CriticalValueResult(
            c_hat=lo,
            infimal_coverage=inf_lo,
            argmin_delta=arg_lo,
            method=METHOD_SOLVED,
            iterations=iterations,
        )

    while hi - lo > c_tol:
        if iterations >= _MAX_ITERATIONS:
            raise SolverError(
                f"critical value bisection did not converge for rho={rho}, alpha={alpha}",
                trace,
            )
        mid = 0.5 * (lo + hi)
        inf_mid, _ = infimum(mid)
        iterations += 1
        if inf_mid < target:
            lo = mid
        else:
            hi = mid

    c_hat = 0.5 * (lo + hi)
    inf_c, arg_c = infimum(c_hat)
    iterations += 1
    if abs(inf_c - target) > tol:
        raise SolverError(
            f"converged bracket violates coverage tolerance {tol} "
            f"(coverage {inf_c:.6f} vs target {target:.6f})",
            trace,
        )
    return CriticalValueResult(
        c_hat=c_hat,
        infimal_coverage=inf_c,
        argmin_delta=arg_c,
        method=METHOD_SOLVED,
        iterations=iterations,
    )


def generate_table1(
    rhos,
    alphas,
    tol: float = 1e-4,
    grid_spec: tuple[float, float] = DEFAULT_GRID_SPEC,
) -> list[Table1Cell]:
    """Solve the critical value cell by cell over a (rho, alpha) grid.

    All cells are solved numerically (``rho_known_zero`` is never assumed),
    and each carries both full precision and the conventional 2-decimal
    rounding.
    """
    cells = []
    for alpha in alphas:
        for rho in rhos:
            res = solve_critical_value(rho, alpha, rho_known_zero=False,
                                       tol=tol, grid_spec=grid_spec)
            cells.append(Table1Cell(
                rho=float(rho),
                alpha=float(alpha),
                c_hat=res.c_hat,
                c_rounded=round(res.c_hat, 2),
                infimal_coverage=res.infimal_coverage,
                argmin_delta=res.argmin_delta,
            ))
    return cells
