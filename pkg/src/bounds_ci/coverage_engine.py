"""Coverage probability of the adaptive-interval event and its diagnostics.

The central object is the probability, under a correlated bivariate
standard normal ``(Z1, Z2)``, of the union event

    { Z1 - (lam/sigma_L) d <= c  and  Z2 + ((1-lam)/sigma_U) d >= -c }
    or
    { |Z1 + Z2 + ((1-lam)/sigma_U - lam/sigma_L) d| <= gamma_rho },

where ``gamma_rho = sqrt(2 + 2 rho) * Phi^{-1}(1 - alpha/2)``. The first
branch is the bounds interval covering the target, the second is the
two-sided interval around the precision-weighted midpoint covering it.
Everything is evaluated deterministically: the rectangle term via
:func:`bounds_ci.normal_kernel.bivariate_rect_prob`, the two-sided term in
closed form, and the overlap term as a single one-dimensional integral in
rotated coordinates ``X1 = (Z1+Z2)/sqrt(2)``, ``X2 = (Z2-Z1)/sqrt(2)``
(uncorrelated, with variances ``1+rho`` and ``1-rho``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import ndtr

from .normal_kernel import (
    DEGENERATE_RHO_TOL,
    bivariate_rect_prob,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
    validate_correlation,
)

__all__ = [
    "EventParams",
    "DeltaProfile",
    "event_probability",
    "ci_coverage_objective",
    "tail_limit_coverage",
    "delta_profile",
    "derivative_terms",
    "lambda_profile",
    "DEFAULT_GRID_SPEC",
]

_SQRT2 = math.sqrt(2.0)

# Infimum search grid: interval lengths 0..20 (in sigma_L units) in steps of
# 0.005, with the analytic d -> inf tail handled exactly. Far beyond any
# feature of the coverage profiles, cheap under the vectorized quadrature.
DEFAULT_GRID_SPEC = (20.0, 0.005)

# Quadrature controls for the overlap integral: panels are doubled until the
# batch-wide change drops below the target, starting from _BASE_PANELS per
# smooth piece. The integrand is a product of normal pdf/cdf factors, so
# convergence is geometric.
_QUAD_TOL = 1e-10
_BASE_PANELS = 3
_MAX_DOUBLINGS = 5
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_TRUNC_SD = 8.5


@dataclass(frozen=True)
class EventParams:
    """Parameters of one coverage event.

    ``delta`` is the population interval length (upper bound minus lower
    bound; negative values encode crossed bounds), ``lam`` places the target
    inside the interval (0 = lower endpoint, 1 = upper endpoint), ``c`` is
    the candidate critical value, and ``alpha`` the nominal level.
    """

    delta: float
    lam: float
    c: float
    sigma_L: float
    sigma_U: float
    rho: float
    alpha: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.delta):
            raise ValueError("delta must be finite")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam!r}")
        if not (self.sigma_L > 0.0 and self.sigma_U > 0.0):
            raise ValueError("sigma_L and sigma_U must be strictly positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        object.__setattr__(self, "rho", validate_correlation(self.rho))
        if not (math.isfinite(self.c) and self.c > 0.0):
            raise ValueError(f"c must be a positive real, got {self.c!r}")

    @cached_property
    def gamma_rho(self) -> float:
        """Half-width of the two-sided branch in Z1+Z2 units."""
        return math.sqrt(2.0 + 2.0 * self.rho) * std_normal_quantile(1.0 - self.alpha / 2.0)

    @cached_property
    def lambda_star(self) -> float:
        """Mixture weight of the precision-weighted midpoint."""
        return self.sigma_L / (self.sigma_L + self.sigma_U)

    @cached_property
    def beta(self) -> float:
        """Reparameterized interval length along which endpoint symmetry holds."""
        return self.delta * (self.lam * self.sigma_U + (1.0 - self.lam) * self.sigma_L) / (
            self.sigma_L * self.sigma_U
        )


@dataclass(frozen=True)
class DeltaProfile:
    """Coverage as a function of the interval length, with its infimum.

    ``argmin_delta`` is ``math.inf`` when the infimum is only attained in
    the d -> inf limit (the ``tail_limit``).
    """

    deltas: np.ndarray
    coverages: np.ndarray
    tail_limit: float
    infimum: float
    argmin_delta: float

    @property
    def grid(self) -> list[tuple[float, float]]:
        return list(zip(self.deltas.tolist(), self.coverages.tolist()))

    def rows(self):
        """Yield (delta, coverage) pairs, CSV-ready."""
        yield from zip(self.deltas.tolist(), self.coverages.tolist())


def _segment_integral(lo, hi, r2a, r2b, s1, s2, panels: int) -> np.ndarray:
    """Integrate ndtr(-(max(x - r2a, r2b - x))/s2) * N(0, s1^2) over [lo, hi]."""
    total = np.zeros(lo.shape)
    length = hi - lo
    inv_s1 = 1.0 / s1
    norm = inv_s1 / math.sqrt(2.0 * math.pi)
    for p in range(panels):
        le = lo + length * (p / panels)
        he = lo + length * ((p + 1) / panels)
        mid = 0.5 * (le + he)
        half = 0.5 * (he - le)
        x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        t = np.maximum(x - r2a[:, None], r2b[:, None] - x)
        g = ndtr(-t / s2) * np.exp(-0.5 * (x * inv_s1) ** 2) * norm
        total += half * (g @ _GL_WEIGHTS)
    return total


def _overlap_probability(a, b, w_lo, w_hi, rho: float) -> np.ndarray:
    """P(Z1 <= a, Z2 >= b, w_lo <= Z1 + Z2 <= w_hi) for |rho| < 1.

    In rotated coordinates the slab constraint bounds X1 while the two
    half-planes become X2 >= max(x1 - sqrt(2) a, sqrt(2) b - x1); that max
    has a single kink, so the integral is split there and each smooth piece
    is handled by adaptive composite Gauss-Legendre panels.
    """
    s1 = math.sqrt(1.0 + rho)
    s2 = math.sqrt(1.0 - rho)
    lo = np.maximum(w_lo / _SQRT2, -_TRUNC_SD * s1)
    hi = np.minimum(w_hi / _SQRT2, _TRUNC_SD * s1)
    hi = np.maximum(lo, hi)
    kink = np.clip((a + b) / _SQRT2, lo, hi)
    r2a = _SQRT2 * a
    r2b = _SQRT2 * b

    def total(panels: int) -> np.ndarray:
        return (_segment_integral(lo, kink, r2a, r2b, s1, s2, panels)
                + _segment_integral(kink, hi, r2a, r2b, s1, s2, panels))

    panels = _BASE_PANELS
    prev = total(panels)
    for _ in range(_MAX_DOUBLINGS):
        panels *= 2
        cur = total(panels)
        if np.max(np.abs(cur - prev)) < _QUAD_TOL:
            return cur
        prev = cur
    return cur


def _phi_interval_union(a_lo, a_hi, b_lo, b_hi) -> np.ndarray:
    """Phi-measure of the union of two intervals on the real line."""
    a_lo, a_hi, b_lo, b_hi = np.broadcast_arrays(a_lo, a_hi, b_lo, b_hi)
    pa = np.maximum(0.0, ndtr(a_hi) - ndtr(a_lo))
    pb = np.maximum(0.0, ndtr(b_hi) - ndtr(b_lo))
    i_lo = np.maximum(a_lo, b_lo)
    i_hi = np.minimum(a_hi, b_hi)
    pi = np.maximum(0.0, ndtr(i_hi) - ndtr(i_lo))
    return np.clip(pa + pb - pi, 0.0, 1.0)


def _event_probability_batch(deltas, lam, c, sigma_L, sigma_U, rho, alpha) -> np.ndarray:
    """Vectorized coverage-event probability over an array of deltas."""
    deltas = np.asarray(deltas, dtype=float)
    q = std_normal_quantile(1.0 - alpha / 2.0)
    s = math.sqrt(2.0 + 2.0 * rho)
    gamma = s * q
    a = c + (lam / sigma_L) * deltas
    b = -c - ((1.0 - lam) / sigma_U) * deltas
    m = ((1.0 - lam) / sigma_U - lam / sigma_L) * deltas

    if rho >= 1.0 - DEGENERATE_RHO_TOL:
        # Z2 = Z1: both branches are intervals for Z1.
        return _phi_interval_union(b, a, (-gamma - m) / 2.0, (gamma - m) / 2.0)
    if rho <= -1.0 + DEGENERATE_RHO_TOL:
        # Z2 = -Z1: the sum Z1 + Z2 degenerates at 0, so the two-sided
        # branch is all-or-nothing depending on whether |m| <= gamma.
        p_first = ndtr(np.clip(np.minimum(a, -b), -30.0, 30.0))
        return np.where(np.abs(m) <= gamma, 1.0, p_first)

    p_first = bivariate_rect_prob(a, b, rho)
    p_second = ndtr((gamma - m) / s) - ndtr((-gamma - m) / s)
    p_both = _overlap_probability(a, b, -gamma - m, gamma - m, rho)
    return np.clip(p_first + p_second - p_both, 0.0, 1.0)


def event_probability(params: EventParams) -> float:
    """Probability of the coverage event described by ``params``.

    Deterministic to roughly 1e-9 absolute error; the Monte Carlo twin of
    this quantity lives in the test suite, not here.
    """
    p = _event_probability_batch(
        np.array([params.delta]), params.lam, params.c,
        params.sigma_L, params.sigma_U, params.rho, params.alpha,
    )
    return float(p[0])


def ci_coverage_objective(delta: float, c: float, rho: float, alpha: float) -> float:
    """Coverage at the upper endpoint with unit scales: the solver's objective.

    Equals :func:`event_probability` with ``lam = 1`` and both sigmas 1,
    i.e. P(Z1 - d - c <= 0 <= Z2 + c  or  |Z1 + Z2 - d| <= gamma_rho).
    """
    if not (math.isfinite(delta) and delta >= 0.0):
        raise ValueError(f"delta must be a nonnegative real, got {delta!r}")
    rho = validate_correlation(rho)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    p = _event_probability_batch(np.array([delta]), 1.0, c, 1.0, 1.0, rho, alpha)
    return float(p[0])


def tail_limit_coverage(c: float, rho: float) -> float:
    """The d -> inf limit of the coverage objective, which is Phi(c).

    In that limit the bounds interval only fails on one side and the
    two-sided branch vanishes, so the limit does not depend on rho (the
    argument is validated but otherwise unused).
    """
    validate_correlation(rho)
    return std_normal_cdf(c)


def delta_profile(
    c: float,
    rho: float,
    alpha: float,
    grid_spec: tuple[float, float] = DEFAULT_GRID_SPEC,
) -> DeltaProfile:
    """Coverage profile over a delta grid plus the exact tail limit.

    The infimum is the minimum of the grid values and the analytic tail;
    ``argmin_delta`` is ``inf`` when the tail is (weakly) the minimizer.
    """
    max_delta, step = grid_spec
    if not (max_delta > 0.0 and step > 0.0):
        raise ValueError(f"grid_spec must be positive (max_delta, step), got {grid_spec!r}")
    rho = validate_correlation(rho)
    deltas = np.arange(0.0, max_delta + step / 2.0, step)
    coverages = _event_probability_batch(deltas, 1.0, c, 1.0, 1.0, rho, alpha)
    tail = tail_limit_coverage(c, rho)
    i = int(np.argmin(coverages))
    if coverages[i] < tail:
        infimum, argmin = float(coverages[i]), float(deltas[i])
    else:
        infimum, argmin = tail, math.inf
    return DeltaProfile(deltas=deltas, coverages=coverages,
                        tail_limit=tail, infimum=infimum, argmin_delta=argmin)


def derivative_terms(delta: float, c: float, gamma: float) -> tuple[float, float]:
    """Terms (A, B) of the coverage derivative in delta for rho = 0.

    ``gamma`` is the two-sided half-width sqrt(2) * Phi^{-1}(1 - alpha/2).
    A is zero at delta = 0 and negative afterward, B is positive
    throughout, and A + B equals d/d(delta) of
    :func:`ci_coverage_objective` at rho = 0. Their sum changes sign at
    most once, from + to -, which is what pins the worst case at the tail.
    """
    if delta < 0.0:
        raise ValueError(f"delta must be >= 0, got {delta!r}")
    a_term = (
        (std_normal_pdf((gamma + delta) / _SQRT2) - std_normal_pdf((delta - gamma) / _SQRT2))
        / _SQRT2
        * std_normal_cdf((gamma - delta - 2.0 * c) / _SQRT2)
    )
    b_term = std_normal_pdf(delta + c) * std_normal_cdf(c - gamma)
    return float(a_term), float(b_term)


def lambda_profile(
    beta: float,
    c: float,
    sigma_L: float,
    sigma_U: float,
    rho: float,
    alpha: float,
    lambda_grid,
) -> list[tuple[float, float]]:
    """Coverage along the constraint d = sigma_L sigma_U beta / (lam sigma_U + (1-lam) sigma_L).

    Holding ``beta`` fixed, the event probability is symmetric in the two
    endpoints lam = 0 and lam = 1 and peaks at the interior weight
    sigma_L / (sigma_L + sigma_U); this function exposes that profile for
    the shape checks.
    """
    if beta < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta!r}")
    out = []
    for lam in lambda_grid:
        lam = float(lam)
        if not 0.0 <= lam <= 1.0:
            raise ValueError(f"lambda grid values must lie in [0, 1], got {lam!r}")
        d = sigma_L * sigma_U * beta / (lam * sigma_U + (1.0 - lam) * sigma_L)
        p = _event_probability_batch(np.array([d]), lam, c, sigma_L, sigma_U,
                                     validate_correlation(rho), alpha)
        out.append((lam, float(p[0])))
    return out
