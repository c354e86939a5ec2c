"""Confidence intervals for a parameter bounded by two normal estimators.

The adaptive interval is the union of the estimated bounds expanded by a
calibrated critical value and a two-sided interval around the
precision-weighted midpoint of the bounds. It is never empty, covers a
well-defined target whether or not the bounds cross, and for uncorrelated
estimators at conventional levels reduces to a simple recipe (one-sided
expansion of the bounds, two-sided interval on the weighted average).
"""

from .coverage_engine import (
    DeltaProfile,
    EventParams,
    ci_coverage_objective,
    delta_profile,
    derivative_terms,
    event_probability,
    lambda_profile,
    tail_limit_coverage,
)
from .critical_value import (
    CriticalValueResult,
    SolverError,
    Table1Cell,
    generate_table1,
    one_sided_shortcut_applies,
    set_coverage_critical_value,
    solve_critical_value,
)
from .intervals import (
    InferenceProblem,
    Interval,
    IntervalReport,
    build_ci_ma,
    build_ci_ti,
    build_ci_ti_union,
    pseudo_true,
    relative_excess_length,
    sigma_star,
    ti_critical_values,
)
from .normal_kernel import (
    RngStream,
    bivariate_rect_prob,
    sample_bivariate,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
    validate_correlation,
)
from .simulation import (
    CoveragePoint,
    ExperimentConfig,
    quadrature_coverage_curve,
    run_experiment,
    seeded_streams,
)

__version__ = "0.1.0"

__all__ = [
    "CoveragePoint",
    "CriticalValueResult",
    "DeltaProfile",
    "EventParams",
    "ExperimentConfig",
    "InferenceProblem",
    "Interval",
    "IntervalReport",
    "RngStream",
    "SolverError",
    "Table1Cell",
    "bivariate_rect_prob",
    "build_ci_ma",
    "build_ci_ti",
    "build_ci_ti_union",
    "ci_coverage_objective",
    "delta_profile",
    "derivative_terms",
    "event_probability",
    "generate_table1",
    "lambda_profile",
    "one_sided_shortcut_applies",
    "pseudo_true",
    "quadrature_coverage_curve",
    "relative_excess_length",
    "run_experiment",
    "sample_bivariate",
    "seeded_streams",
    "set_coverage_critical_value",
    "sigma_star",
    "solve_critical_value",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_quantile",
    "tail_limit_coverage",
    "ti_critical_values",
    "validate_correlation",
]
