"""Recover standard errors from published interval endpoints.

The bundled reference table reports bound estimates and the adaptive
interval's endpoints (computed with zero correlation known and the
one-sided critical value), but not the standard errors themselves. This
module inverts the interval construction to recover them: where the
expanded bounds interval strictly dominates, the closed forms

    se_L = (theta_L_hat - lower) / c,   se_U = (upper - theta_U_hat) / c

apply; otherwise (crossed bounds, midpoint interval binding) the two
endpoint equations are solved for (se_L, se_U) by alternating bisection.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .intervals import InferenceProblem, build_ci_ma
from .normal_kernel import std_normal_quantile

__all__ = [
    "ReferenceRow",
    "BackoutResult",
    "load_reference_table",
    "backout_standard_errors",
    "bundled_reference_path",
]

_FIXTURE = "behavioral_games_bounds.csv"
_SE_LO, _SE_HI = 1e-6, 10.0
_ROUND_TRIP_TOL = 5e-4


@dataclass(frozen=True)
class ReferenceRow:
    """One published row: bound estimates plus reference intervals."""

    label: str
    theta_L: float
    theta_U: float
    ci_ma_lo: float
    ci_ma_hi: float
    ci_ti_lo: float
    ci_ti_hi: float
    rel_length: float
    flags: str = ""


@dataclass(frozen=True)
class BackoutResult:
    """Recovered problem for a row, or the reason the row was flagged."""

    row: ReferenceRow
    problem: InferenceProblem | None
    reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.problem is not None


def bundled_reference_path():
    """Path-like handle to the bundled reference table."""
    return resources.files("bounds_ci").joinpath("data", _FIXTURE)


def load_reference_table(path=None) -> list[ReferenceRow]:
    """Load the reference table from ``path`` or the bundled fixture."""
    if path is None:
        text = bundled_reference_path().read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    data_lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(io.StringIO("\n".join(data_lines)))
    rows = []
    for rec in reader:
        rows.append(ReferenceRow(
            label=rec["label"].strip(),
            theta_L=float(rec["theta_L"]),
            theta_U=float(rec["theta_U"]),
            ci_ma_lo=float(rec["ci_ma_lo"]),
            ci_ma_hi=float(rec["ci_ma_hi"]),
            ci_ti_lo=float(rec["ci_ti_lo"]),
            ci_ti_hi=float(rec["ci_ti_hi"]),
            rel_length=float(rec["rel_length"]),
            flags=(rec.get("flags") or "").strip(),
        ))
    return rows


def _ma_endpoints(row: ReferenceRow, se_L: float, se_U: float, c_hat: float, q: float):
    theta_star = (se_U * row.theta_L + se_L * row.theta_U) / (se_L + se_U)
    star_se = se_L * se_U * math.sqrt(2.0) / (se_L + se_U)
    lo = min(row.theta_L - c_hat * se_L, theta_star - q * star_se)
    hi = max(row.theta_U + c_hat * se_U, theta_star + q * star_se)
    return lo, hi


def _bisect(f, lo: float, hi: float, tol: float = 1e-12) -> float | None:
    """Root of a monotone decreasing f on [lo, hi]; None if not bracketed."""
    f_lo, f_hi = f(lo), f(hi)
    if f_lo < 0.0 or f_hi > 0.0:
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _solve_row(row: ReferenceRow, alpha: float, c_hat: float) -> tuple[float, float] | None:
    """Solve the two endpoint equations for (se_L, se_U)."""
    q = std_normal_quantile(1.0 - alpha / 2.0)

    # Closed form under bounds-interval dominance.
    se_L = (row.theta_L - row.ci_ma_lo) / c_hat
    se_U = (row.ci_ma_hi - row.theta_U) / c_hat
    if _SE_LO <= se_L <= _SE_HI and _SE_LO <= se_U <= _SE_HI:
        lo, hi = _ma_endpoints(row, se_L, se_U, c_hat, q)
        if abs(lo - row.ci_ma_lo) <= _ROUND_TRIP_TOL and abs(hi - row.ci_ma_hi) <= _ROUND_TRIP_TOL:
            return se_L, se_U

    # Alternating bisection on the two unknowns. The lower endpoint is
    # decreasing in se_L at fixed se_U, the upper increasing in se_U at
    # fixed se_L, so each inner solve is a monotone root-find.
    se_L = max(se_L, _SE_LO) if math.isfinite(se_L) else 0.01
    se_U = max(se_U, _SE_LO) if math.isfinite(se_U) else 0.01
    se_L = min(se_L, _SE_HI)
    se_U = min(se_U, _SE_HI)
    for _ in range(200):
        new_L = _bisect(lambda s: _ma_endpoints(row, s, se_U, c_hat, q)[0] - row.ci_ma_lo,
                        _SE_LO, _SE_HI)
        if new_L is None:
            return None
        new_U = _bisect(lambda s: -( _ma_endpoints(row, new_L, s, c_hat, q)[1] - row.ci_ma_hi),
                        _SE_LO, _SE_HI)
        if new_U is None:
            return None
        moved = max(abs(new_L - se_L), abs(new_U - se_U))
        se_L, se_U = new_L, new_U
        if moved < 1e-12:
            break
    lo, hi = _ma_endpoints(row, se_L, se_U, c_hat, q)
    if abs(lo - row.ci_ma_lo) > _ROUND_TRIP_TOL or abs(hi - row.ci_ma_hi) > _ROUND_TRIP_TOL:
        return None
    return se_L, se_U


def backout_standard_errors(
    rows: list[ReferenceRow],
    alpha: float = 0.05,
) -> list[BackoutResult]:
    """Recover (se_L, se_U) for each reference row.

    Uses zero correlation known a priori, so the critical value is the
    one-sided quantile. Rows with no solution in [1e-6, 10] on either
    scale, or whose recovered problem fails to reproduce the published
    endpoints, are flagged rather than dropped silently.
    """
    c_hat = std_normal_quantile(1.0 - alpha)
    results: list[BackoutResult] = []
    for row in rows:
        solved = _solve_row(row, alpha, c_hat)
        if solved is None:
            results.append(BackoutResult(row=row, problem=None,
                                         reason="no standard errors reproduce the published endpoints"))
            continue
        se_L, se_U = solved
        problem = InferenceProblem(
            theta_L_hat=row.theta_L,
            theta_U_hat=row.theta_U,
            se_L=se_L,
            se_U=se_U,
            rho_hat=0.0,
            alpha=alpha,
            rho_known_zero=True,
            label=row.label,
        )
        report = build_ci_ma(problem)
        err = max(abs(report.ci_ma.lower - row.ci_ma_lo), abs(report.ci_ma.upper - row.ci_ma_hi))
        if err > 1e-3:
            results.append(BackoutResult(row=row, problem=None,
                                         reason=f"round-trip endpoint error {err:.2e} exceeds 1e-3"))
            continue
        results.append(BackoutResult(row=row, problem=problem))
    return results
