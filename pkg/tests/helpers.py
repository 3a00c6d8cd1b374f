"""Shared data generators for the test suite."""

import numpy as np

from welfare_resilience import ArmaParams, ArmaSpec, LevelSeries, simulate


def arima_levels(beta1=0.0, g=10.0, sigma=50.0, n=200, seed=0, k0=2000.0, unit="u", theta1=None):
    """Levels integrated from ARMA(1,0) (or (0,1)) increments."""
    betas = (beta1,) if beta1 else ()
    thetas = (theta1,) if theta1 is not None else ()
    params = ArmaParams(g, betas, thetas, sigma)
    inc = simulate(params, params.spec, n - 1, seed).values
    return LevelSeries.from_values(np.r_[k0, k0 + np.cumsum(inc)], unit_id=unit)


def trend_stationary_levels(a=100.0, g=5.0, sd=10.0, n=200, seed=0, unit="u"):
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    return LevelSeries.from_values(a + g * t + rng.normal(0.0, sd, n), unit_id=unit)


def random_walk_levels(g=2.0, sd=10.0, n=200, seed=0, unit="u"):
    rng = np.random.default_rng(seed)
    inc = g + rng.normal(0.0, sd, n - 1)
    return LevelSeries.from_values(np.r_[100.0, 100.0 + np.cumsum(inc)], unit_id=unit)


def spec(p, q):
    return ArmaSpec(p, q)
