"""Level, trend, volatility and persistence of a welfare series, and the
resilience / resistance classification built from them.

A unit is *resilient* when its trend is not deteriorating and its increments
are anti-persistent (``pi < 0``), and *resistant* when its trend is not
deteriorating and typical shocks are too small to invert the trend
(``rho = sigma / (2|g|) - 1 < 0``).
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.stats import norm
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import arma
from ._validation import check_probability
from .config import AnalysisConfig
from .diagnostics import AdfResult, LjungBoxResult, adf_test, ljung_box
from .exceptions import (
    DegenerateSeries,
    InvalidInput,
    InvalidSigma,
    SeriesTooShort,
    SingularRegression,
)
from .series import DescriptiveStats, LevelSeries, acf, difference

__all__ = [
    "ResilienceProfile",
    "Classification",
    "NonparametricProfile",
    "persistence",
    "persistence_category",
    "relative_volatility",
    "trend_category",
    "classify",
    "classify_values",
    "profile",
    "nonparametric_profile",
    "ResilienceAnalyzer",
]

PI_TOL = 1e-6
MIN_LEVELS = 11

IMPROVING, NEUTRAL, DETERIORATING = "improving", "neutral", "deteriorating"
ANTI_PERSISTENT, RANDOM, PERSISTENT = "anti-persistent", "random", "persistent"
TREND_CATEGORIES = (IMPROVING, NEUTRAL, DETERIORATING)


@dataclass(frozen=True)
class ResilienceProfile:
    unit_id: str
    n_levels: int
    level: float
    trend_g: float
    se_g: float
    trend_category: str
    sigma: float
    rho: float  # math.inf when the trend is exactly zero
    pi: float
    persistence_category: str
    selected_spec: arma.ArmaSpec
    fit: arma.ArmaFit
    ljung_box: LjungBoxResult
    ljung_box_residuals: Optional[LjungBoxResult]
    adf_levels: Optional[AdfResult]
    adf_increments: Optional[AdfResult]
    residual_stats: DescriptiveStats
    warnings: Tuple[str, ...] = ()

    @property
    def classification(self):
        return classify(self)


@dataclass(frozen=True)
class Classification:
    resilient: bool
    resistant: bool
    rationale: Dict[str, bool]


@dataclass(frozen=True)
class NonparametricProfile:
    g_np: float
    sigma_np: float
    pi_np: float  # nan for constant increments


def persistence(fit):
    """Sum of all AR and MA coefficients of a fitted model."""
    params = fit.params if isinstance(fit, arma.ArmaFit) else fit
    if not params.betas and not params.thetas:
        return 0.0
    return float(sum(params.betas) + sum(params.thetas))


def persistence_category(pi, spec=None):
    if spec is not None and spec.p == 0 and spec.q == 0 and abs(pi) < PI_TOL:
        return RANDOM
    if pi < 0:
        return ANTI_PERSISTENT
    if pi > 0:
        return PERSISTENT
    return RANDOM


def relative_volatility(g, sigma):
    """``sigma / (2 |g|) - 1``; infinite when ``g == 0``."""
    sigma = float(sigma)
    if not sigma > 0 or not math.isfinite(sigma):
        raise InvalidSigma(f"sigma must be positive and finite, got {sigma}")
    g = float(g)
    if g == 0.0:
        return math.inf
    return sigma / (2.0 * abs(g)) - 1.0


def trend_category(g, se_g, alpha=0.05):
    """Two-sided normal test of ``g = 0`` at level ``alpha``."""
    se_g = float(se_g)
    if not se_g > 0:
        raise InvalidInput(f"se_g must be positive, got {se_g}")
    alpha = check_probability(alpha, "alpha")
    crit = norm.ppf(1.0 - alpha / 2.0)
    t = float(g) / se_g
    if t > crit:
        return IMPROVING
    if t < -crit:
        return DETERIORATING
    return NEUTRAL


def _sign_category(g):
    if g > 0:
        return IMPROVING
    if g < 0:
        return DETERIORATING
    return NEUTRAL


def classify_values(trend, pi, rho):
    if trend not in TREND_CATEGORIES:
        raise InvalidInput(f"unknown trend category {trend!r}")
    non_deteriorating = trend != DETERIORATING
    anti_persistent = pi < -PI_TOL
    not_volatile = rho < 0
    return Classification(
        resilient=non_deteriorating and anti_persistent,
        resistant=non_deteriorating and not_volatile,
        rationale={
            "non_deteriorating": non_deteriorating,
            "anti_persistent": anti_persistent,
            "not_volatile": not_volatile,
        },
    )


def classify(profile):
    """Resilience and resistance flags of a :class:`ResilienceProfile`."""
    return classify_values(profile.trend_category, profile.pi, profile.rho)


def _level_series(series):
    if isinstance(series, LevelSeries):
        return series
    return LevelSeries.from_values(series)


def _windowed(series, config):
    window = dict(config.sample_windows).get(series.unit_id)
    if window is None:
        return series
    lo, hi = window
    mask = np.ones(len(series), dtype=bool)
    if lo is not None:
        mask &= series.times >= lo
    if hi is not None:
        mask &= series.times <= hi
    if mask.sum() < 2:
        raise SeriesTooShort(f"unit {series.unit_id!r}: window {window} leaves {mask.sum()} levels")
    return series.window(lo, hi)


def _safe_adf(values, kind, variant, warnings, label):
    try:
        return adf_test(values, kind=kind, variant=variant)
    except SeriesTooShort:
        warnings.append(f"adf-{label}-skipped")
    except SingularRegression:
        warnings.append(f"adf-{label}-singular")
    return None


def profile(series, config=None):
    """Fit the increment model of one unit and compute its four properties.

    Steps: difference, ADF on levels (constant + trend) and on increments
    (constant), AIC order selection, metrics, Ljung-Box on the increments,
    residual moments, categories. A ``nonstationary-increments`` warning is
    attached when the increment ADF cannot reject a unit root at 10%.
    """
    config = config or AnalysisConfig()
    series = _windowed(_level_series(series), config)
    if len(series) < MIN_LEVELS:
        raise SeriesTooShort(
            f"unit {series.unit_id!r}: need at least {MIN_LEVELS} levels, got {len(series)}"
        )
    inc = difference(series)
    x = inc.values
    if np.all(x == x[0]):
        raise DegenerateSeries(f"unit {series.unit_id!r}: increments are constant")

    warnings = []
    adf_levels = _safe_adf(series.values, "ct", config.adf_variant, warnings, "levels")
    adf_increments = _safe_adf(x, "c", config.adf_variant, warnings, "increments")
    if adf_increments is not None and not adf_increments.rejects("10%"):
        warnings.append("nonstationary-increments")

    fit = arma.select_order(
        x, config.max_p, config.max_q, criterion=config.aic_variant, screen=config.screen
    )
    warnings.extend(fit.warnings)
    g = fit.params.g
    sigma = fit.params.sigma
    pi = persistence(fit)

    lags = config.ljung_box_lags
    lb = ljung_box(x, lags)
    try:
        lb_resid = ljung_box(fit.residuals, lb.lags, model_df=fit.spec.p + fit.spec.q)
    except (ValueError, ArithmeticError):
        lb_resid = None

    if config.trend_rule == "sign":
        trend = _sign_category(g)
    else:
        trend = trend_category(g, fit.se_g, config.alpha_trend)

    return ResilienceProfile(
        unit_id=series.unit_id,
        n_levels=len(series),
        level=float(np.mean(series.values)),
        trend_g=g,
        se_g=fit.se_g,
        trend_category=trend,
        sigma=sigma,
        rho=relative_volatility(g, sigma),
        pi=pi,
        persistence_category=persistence_category(pi, fit.spec),
        selected_spec=fit.spec,
        fit=fit,
        ljung_box=lb,
        ljung_box_residuals=lb_resid,
        adf_levels=adf_levels,
        adf_increments=adf_increments,
        residual_stats=fit.residual_stats,
        warnings=tuple(dict.fromkeys(warnings)),
    )


def nonparametric_profile(series):
    """Sample mean, sd and lag-1 autocorrelation of the increments."""
    series = _level_series(series)
    if len(series) < MIN_LEVELS:
        raise SeriesTooShort(f"need at least {MIN_LEVELS} levels, got {len(series)}")
    x = difference(series).values
    if np.all(x == x[0]):
        return NonparametricProfile(float(x[0]), 0.0, math.nan)
    return NonparametricProfile(float(x.mean()), float(x.std(ddof=1)), acf(x, 1)[1])


def _as_series_list(X):
    if isinstance(X, LevelSeries):
        return [X]
    if isinstance(X, dict):
        return [s if isinstance(s, LevelSeries) else LevelSeries.from_values(s, str(k)) for k, s in X.items()]
    if isinstance(X, (list, tuple)) and X and isinstance(X[0], LevelSeries):
        return list(X)
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise InvalidInput("X must be a LevelSeries, a mapping, or a 2-D array of shape (n_units, n_times)")
    return [LevelSeries.from_values(row, unit_id=str(i)) for i, row in enumerate(arr)]


class ResilienceAnalyzer(TransformerMixin, BaseEstimator):
    """Per-unit resilience analysis with a scikit-learn interface.

    Each row of ``X`` (or each :class:`LevelSeries`) is one unit's level
    series. ``transform`` maps units to the feature matrix
    ``[level, g, sigma, rho, pi]`` and ``predict`` returns resilience flags.

    Parameters mirror :class:`AnalysisConfig`.

    Attributes
    ----------
    profiles_ : list of ResilienceProfile
    classifications_ : list of Classification
    """

    feature_names = ("level", "g", "sigma", "rho", "pi")

    def __init__(
        self,
        max_p=2,
        max_q=2,
        alpha_trend=0.05,
        ljung_box_lags=None,
        aic_variant="aic",
        adf_variant="tau",
        trend_rule="significance",
        screen=True,
    ):
        self.max_p = max_p
        self.max_q = max_q
        self.alpha_trend = alpha_trend
        self.ljung_box_lags = ljung_box_lags
        self.aic_variant = aic_variant
        self.adf_variant = adf_variant
        self.trend_rule = trend_rule
        self.screen = screen

    def _config(self):
        return AnalysisConfig(**self.get_params())

    def _profiles(self, X):
        config = self._config()
        return [profile(s, config) for s in _as_series_list(X)]

    @staticmethod
    def _features(profiles):
        return np.array([[p.level, p.trend_g, p.sigma, p.rho, p.pi] for p in profiles])

    def fit(self, X, y=None):
        self.profiles_ = self._profiles(X)
        self.classifications_ = [classify(p) for p in self.profiles_]
        return self

    def transform(self, X):
        check_is_fitted(self, "profiles_")
        return self._features(self._profiles(X))

    def fit_transform(self, X, y=None, **fit_params):
        return self._features(self.fit(X).profiles_)

    def predict(self, X):
        """Boolean resilience flag per unit."""
        check_is_fitted(self, "profiles_")
        return np.array([classify(p).resilient for p in self._profiles(X)])

    def get_feature_names_out(self, input_features=None):
        return np.array(self.feature_names, dtype=object)
