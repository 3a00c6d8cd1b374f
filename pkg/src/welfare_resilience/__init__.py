"""Resilience and resistance of welfare time series.

Each unit's level series is differenced and the increments are fitted with a
low-order ARMA model. The fitted trend, volatility and persistence classify
the unit as resilient (shocks are reversed) and/or resistant (shocks are too
small to invert the trend). Cross-sectional helpers rank units, correlate the
properties and regress them on covariates.
"""

__version__ = "0.1.0"

from .arma import ArmaFit, ArmaModel, ArmaParams, ArmaSpec, fit, loglik, select_order, simulate
from .config import AnalysisConfig
from .crosssection import (
    HC0Regression,
    OlsResult,
    PanelTable,
    PropertyMatrix,
    Ranking,
    ols_hc0,
    property_matrix,
    rank,
    yearly_stats,
)
from .diagnostics import AdfResult, LjungBoxResult, adf_test, ljung_box
from .exceptions import ResilienceError
from .io import PanelInput, ingest
from .resilience import (
    Classification,
    NonparametricProfile,
    ResilienceAnalyzer,
    ResilienceProfile,
    classify,
    nonparametric_profile,
    persistence,
    profile,
    relative_volatility,
    trend_category,
)
from .series import DescriptiveStats, IncrementSeries, LevelSeries, acf, describe, difference, spearman

__all__ = [
    "AdfResult",
    "AnalysisConfig",
    "ArmaFit",
    "ArmaModel",
    "ArmaParams",
    "ArmaSpec",
    "Classification",
    "DescriptiveStats",
    "HC0Regression",
    "IncrementSeries",
    "LevelSeries",
    "LjungBoxResult",
    "NonparametricProfile",
    "OlsResult",
    "PanelInput",
    "PanelTable",
    "PropertyMatrix",
    "Ranking",
    "ResilienceAnalyzer",
    "ResilienceError",
    "ResilienceProfile",
    "acf",
    "adf_test",
    "classify",
    "describe",
    "difference",
    "fit",
    "ingest",
    "ljung_box",
    "loglik",
    "nonparametric_profile",
    "ols_hc0",
    "persistence",
    "profile",
    "property_matrix",
    "rank",
    "relative_volatility",
    "select_order",
    "simulate",
    "spearman",
    "trend_category",
    "yearly_stats",
]
