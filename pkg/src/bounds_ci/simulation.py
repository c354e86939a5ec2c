"""Monte Carlo laboratory for coverage and expected-length curves.

Estimators are drawn straight from their limiting distribution with known
scales: the lower bound estimate is ``Z1``, the upper is ``delta + Z2``,
both with unit standard errors, so interval lengths are denominated in
estimator standard errors. Negative ``delta`` values push the experiment
into the misspecified range, where coverage is tracked for the
precision-weighted midpoint instead of the (empty) identified set.

Runs are bit-reproducible: replications are partitioned into a fixed
number of blocks, each driven by its own counter-based stream, and block
results are reduced in block order regardless of how many workers execute
them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coverage_engine import _event_probability_batch
from .critical_value import solve_critical_value
from .intervals import _ti_endpoints, ti_critical_values
from .normal_kernel import (
    RngStream,
    sample_bivariate,
    std_normal_quantile,
    validate_correlation,
)

__all__ = [
    "ExperimentConfig",
    "CoveragePoint",
    "run_experiment",
    "quadrature_coverage_curve",
    "seeded_streams",
    "METHODS",
    "default_delta_grid",
]

CI_MA = "CI_MA"
CI_TI = "CI_TI"
CI_TI_UNION = "CI_TI_union"
METHODS = (CI_MA, CI_TI, CI_TI_UNION)

# Replications are always split into this many blocks (fewer only when there
# are fewer replications), so the stream layout and the reduction order do
# not depend on the worker count.
_N_BLOCKS = 32


def default_delta_grid(lo: float = -4.0, hi: float = 10.0, step: float = 0.25) -> list[float]:
    """The default interval-length grid: -4 to 10 in steps of 0.25 SD."""
    n = int(round((hi - lo) / step))
    return [lo + i * step for i in range(n + 1)]


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation run: a correlation, a level, and a delta grid."""

    rho: float
    alpha: float
    delta_grid: tuple[float, ...] = field(default_factory=lambda: tuple(default_delta_grid()))
    replications: int = 100_000
    seed: int = 0
    methods: tuple[str, ...] = METHODS
    workers: int = 1
    c_override: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho", validate_correlation(self.rho))
        if not 0.0 < self.alpha < 0.5:
            raise ValueError(f"alpha must lie in (0, 0.5), got {self.alpha!r}")
        grid = tuple(float(d) for d in self.delta_grid)
        if len(grid) == 0 or any(not math.isfinite(d) for d in grid):
            raise ValueError("delta grid must be a nonempty list of finite reals")
        if list(grid) != sorted(grid):
            raise ValueError("delta grid must be sorted")
        object.__setattr__(self, "delta_grid", grid)
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class CoveragePoint:
    """One (delta, method) cell: coverage and expected excess length.

    ``expected_excess_length`` subtracts the true identified-set length
    max(delta, 0), so curves across delta compare inferential padding only.
    """

    delta: float
    method: str
    coverage: float
    coverage_se: float
    expected_excess_length: float
    length_se: float


def seeded_streams(seed: int, count: int) -> list[RngStream]:
    """``count`` substreams of one seed with pairwise-distinct stream ids."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return [RngStream(seed=seed, stream_id=i) for i in range(count)]


def _block_sizes(total: int, blocks: int) -> list[int]:
    base, extra = divmod(total, blocks)
    return [base + (1 if i < extra else 0) for i in range(blocks)]


def _method_intervals(method, theta_l, theta_u, c_ma, star_half, consts):
    """Endpoints (lo, hi, empty) for one method on a batch of draws (unit SEs)."""
    theta_star = 0.5 * (theta_l + theta_u)
    ps_lo = theta_star - star_half
    ps_hi = theta_star + star_half
    if method == CI_MA:
        th_lo = theta_l - c_ma
        th_hi = theta_u + c_ma
        nonempty = th_lo <= th_hi
        lo = np.where(nonempty, np.minimum(th_lo, ps_lo), ps_lo)
        hi = np.where(nonempty, np.maximum(th_hi, ps_hi), ps_hi)
        return lo, hi, np.zeros_like(lo, dtype=bool)
    z_pre, cv_one, cv_both = consts
    ti_lo, ti_hi = _ti_endpoints(theta_l, theta_u, 1.0, 1.0, z_pre, cv_one, cv_both)
    if method == CI_TI:
        return ti_lo, ti_hi, ti_lo > ti_hi
    empty_ti = ti_lo > ti_hi
    lo = np.where(empty_ti, ps_lo, np.minimum(ti_lo, ps_lo))
    hi = np.where(empty_ti, ps_hi, np.maximum(ti_hi, ps_hi))
    return lo, hi, np.zeros_like(lo, dtype=bool)


def _run_block(config, delta, stream, count, c_ma, star_half, ti_consts):
    """Per-block accumulators: cover counts at each target and length sums."""
    draws = sample_bivariate(config.rho, stream, count)
    theta_l = draws[:, 0]
    theta_u = delta + draws[:, 1]
    targets = [0.0, delta] if delta >= 0.0 else [delta / 2.0]
    out = {}
    for method in config.methods:
        lo, hi, empty = _method_intervals(
            method, theta_l, theta_u, c_ma, star_half, ti_consts
        )
        covered = [
            int(np.count_nonzero(~empty & (lo <= t) & (t <= hi))) for t in targets
        ]
        length = np.where(empty, 0.0, hi - lo)
        out[method] = (covered, float(length.sum()), float((length * length).sum()))
    return out


def run_experiment(config: ExperimentConfig) -> list[CoveragePoint]:
    """Run the Monte Carlo experiment and return one point per (delta, method).

    For nonnegative delta, coverage is the worse of the two endpoint
    coverage rates; for negative delta it is the coverage of the weighted
    midpoint delta/2. All methods see the same draws at each (delta,
    replication), which sharpens length comparisons.
    """
    q_half = std_normal_quantile(1.0 - config.alpha / 2.0)
    star_half = q_half * math.sqrt(2.0 + 2.0 * config.rho) / 2.0
    if config.c_override is not None:
        c_ma = float(config.c_override)
    else:
        c_ma = solve_critical_value(
            config.rho, config.alpha, rho_known_zero=(config.rho == 0.0)
        ).c_hat
    ti_consts = ti_critical_values(config.rho, config.alpha)

    blocks = min(_N_BLOCKS, config.replications)
    sizes = _block_sizes(config.replications, blocks)
    jobs = []
    for di, delta in enumerate(config.delta_grid):
        for b in range(blocks):
            stream = RngStream(seed=config.seed, stream_id=di * blocks + b)
            jobs.append((di, delta, stream, sizes[b]))

    def work(job):
        di, delta, stream, count = job
        return di, _run_block(config, delta, stream, count, c_ma,
                              star_half, ti_consts)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    # Fixed-order reduction over blocks, independent of execution order
    # (pool.map preserves job order).
    by_delta: dict[int, list[dict]] = {di: [] for di in range(len(config.delta_grid))}
    for di, block_out in results:
        by_delta[di].append(block_out)

    points: list[CoveragePoint] = []
    B = config.replications
    for di, delta in enumerate(config.delta_grid):
        merged = {m: [None, 0.0, 0.0] for m in config.methods}
        for block_out in by_delta[di]:
            for m in config.methods:
                covered, lsum, lsq = block_out[m]
                if merged[m][0] is None:
                    merged[m][0] = list(covered)
                else:
                    merged[m][0] = [a + b for a, b in zip(merged[m][0], covered)]
                merged[m][1] += lsum
                merged[m][2] += lsq
        for m in config.methods:
            covered, lsum, lsq = merged[m]
            cov = min(covered) / B
            cov_se = math.sqrt(max(cov * (1.0 - cov), 0.0) / B)
            mean_len = lsum / B
            var_len = max(lsq - B * mean_len * mean_len, 0.0) / max(B - 1, 1)
            points.append(CoveragePoint(
                delta=delta,
                method=m,
                coverage=cov,
                coverage_se=cov_se,
                expected_excess_length=mean_len - max(delta, 0.0),
                length_se=math.sqrt(var_len / B),
            ))
    return points


def quadrature_coverage_curve(
    rho: float,
    alpha: float,
    delta_grid,
    c_override: float | None = None,
) -> list[tuple[float, float]]:
    """Deterministic twin of the adaptive interval's Monte Carlo coverage curve.

    For nonnegative delta this is the worse of the two endpoint coverage
    probabilities; for negative delta it is the midpoint's coverage, which
    by construction never falls below the nominal level (the two-sided
    branch alone attains it exactly).
    """
    rho = validate_correlation(rho)
    if c_override is not None:
        c_ma = float(c_override)
    else:
        c_ma = solve_critical_value(rho, alpha, rho_known_zero=(rho == 0.0)).c_hat
    deltas = np.asarray(list(delta_grid), dtype=float)
    neg = deltas < 0.0
    out = np.empty_like(deltas)
    if np.any(neg):
        out[neg] = _event_probability_batch(deltas[neg], 0.5, c_ma, 1.0, 1.0, rho, alpha)
    if np.any(~neg):
        upper = _event_probability_batch(deltas[~neg], 1.0, c_ma, 1.0, 1.0, rho, alpha)
        lower = _event_probability_batch(deltas[~neg], 0.0, c_ma, 1.0, 1.0, rho, alpha)
        out[~neg] = np.minimum(upper, lower)
    return list(zip(deltas.tolist(), out.tolist()))
