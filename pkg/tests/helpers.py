"""Shared Monte Carlo oracles for the test suite.

These deliberately bypass the package's stream machinery and recompute
event indicators from first principles, so they stay independent of the
code paths they check.
"""

import numpy as np


def draw_correlated(rng: np.random.Generator, rho: float, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Correlated standard normal pairs via the Cholesky construction."""
    z1 = rng.standard_normal(count)
    eps = rng.standard_normal(count)
    z2 = rho * z1 + np.sqrt(max(0.0, 1.0 - rho * rho)) * eps
    return z1, z2


def mc_event_probability(rng, delta, lam, c, sigma_l, sigma_u, rho, alpha, draws) -> tuple[float, float]:
    """Monte Carlo estimate (and its standard error) of the coverage event."""
    from scipy.special import ndtri

    z1, z2 = draw_correlated(rng, rho, draws)
    gamma = np.sqrt(2.0 + 2.0 * rho) * ndtri(1.0 - alpha / 2.0)
    m = ((1.0 - lam) / sigma_u - lam / sigma_l) * delta
    first = (z1 - (lam / sigma_l) * delta <= c) & (z2 + ((1.0 - lam) / sigma_u) * delta >= -c)
    second = np.abs(z1 + z2 + m) <= gamma
    p = float(np.mean(first | second))
    se = float(np.sqrt(max(p * (1.0 - p), 1e-12) / draws))
    return p, se
