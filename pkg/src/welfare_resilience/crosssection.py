"""Panel-wide analyses: rankings, yearly cross-sections, the Spearman
independence matrix and heteroskedasticity-robust OLS."""

import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.stats import rankdata
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from ._validation import check_int
from .diagnostics import significance_stars
from .exceptions import (
    EmptyPanel,
    EmptyYear,
    InsufficientData,
    InvalidInput,
    RankDeficient,
)
from .series import DescriptiveStats, describe, spearman

__all__ = [
    "PanelTable",
    "OlsResult",
    "Ranking",
    "RankEntry",
    "PropertyMatrix",
    "ols_hc0",
    "rank",
    "yearly_stats",
    "property_matrix",
    "HC0Regression",
    "PROPERTIES",
]

PROPERTIES = ("level", "trend", "rho", "pi")
# best-first ordering used for the best/worst performer table
DEFAULT_DIRECTION = {"level": "desc", "trend": "desc", "rho": "asc", "pi": "asc"}


@dataclass(frozen=True)
class PanelTable:
    """Column view of per-unit results plus optional covariates.

    ``covariates`` maps unit id to ``{name: value}``; missing entries are
    treated as missing values.
    """

    unit_ids: Tuple[str, ...]
    level: np.ndarray
    trend: np.ndarray
    rho: np.ndarray
    pi: np.ndarray
    ljung_box_p: np.ndarray
    covariates: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        ids = tuple(str(u) for u in self.unit_ids)
        if len(set(ids)) != len(ids):
            raise InvalidInput("unit ids in a panel must be unique")
        object.__setattr__(self, "unit_ids", ids)
        for name in PROPERTIES + ("ljung_box_p",):
            col = np.asarray(getattr(self, name), dtype=float)
            if col.shape != (len(ids),):
                raise InvalidInput(f"column {name!r} has shape {col.shape}, expected ({len(ids)},)")
            col.setflags(write=False)
            object.__setattr__(self, name, col)

    @classmethod
    def from_profiles(cls, profiles, covariates=None):
        profiles = list(profiles)
        return cls(
            unit_ids=tuple(p.unit_id for p in profiles),
            level=[p.level for p in profiles],
            trend=[p.trend_g for p in profiles],
            rho=[p.rho for p in profiles],
            pi=[p.pi for p in profiles],
            ljung_box_p=[p.ljung_box.p_value for p in profiles],
            covariates=dict(covariates or {}),
        )

    def __len__(self):
        return len(self.unit_ids)

    def column(self, name):
        if name in PROPERTIES:
            return getattr(self, name)
        return np.array(
            [self.covariates.get(u, {}).get(name, math.nan) for u in self.unit_ids], dtype=float
        )

    def subset(self, units):
        """Rows whose unit id is in ``units``, in panel order."""
        keep = set(units)
        idx = [i for i, u in enumerate(self.unit_ids) if u in keep]
        return PanelTable(
            tuple(self.unit_ids[i] for i in idx),
            self.level[idx],
            self.trend[idx],
            self.rho[idx],
            self.pi[idx],
            self.ljung_box_p[idx],
            {u: self.covariates[u] for u in keep if u in self.covariates},
        )


@dataclass(frozen=True)
class OlsResult:
    names: Tuple[str, ...]
    coefficients: np.ndarray
    hc0_se: np.ndarray
    p_values: np.ndarray
    r_squared: float
    n_used: int
    cov_type: str = "hc0"

    @property
    def stars(self):
        return tuple(significance_stars(p) for p in self.p_values)

    def as_dict(self):
        return {
            name: (float(b), float(se), s)
            for name, b, se, s in zip(self.names, self.coefficients, self.hc0_se, self.stars)
        }


@dataclass(frozen=True)
class RankEntry:
    position: int
    unit_id: str
    value: float
    stars: str = ""


@dataclass(frozen=True)
class Ranking:
    property: str
    direction: str
    entries: Tuple[RankEntry, ...]
    excluded: Tuple[str, ...] = ()

    @property
    def unit_ids(self):
        return [e.unit_id for e in self.entries]


@dataclass(frozen=True)
class PropertyMatrix:
    names: Tuple[str, ...]
    coefficients: np.ndarray
    p_values: np.ndarray
    n_used: int
    excluded: Tuple[str, ...] = ()


def ols_hc0(y, X, names=None, cov_type="hc0"):
    """OLS with an intercept and Huber-White standard errors.

    Rows with any missing value are dropped listwise. ``cov_type="hc1"``
    applies the ``n / (n - k)`` small-sample scaling.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != y.size:
        raise InvalidInput(f"X has {X.shape[0]} rows, y has {y.size}")
    if cov_type not in ("hc0", "hc1"):
        raise InvalidInput(f"cov_type must be 'hc0' or 'hc1', got {cov_type!r}")
    names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(X.shape[1]))
    if len(names) != X.shape[1]:
        raise InvalidInput("one name per regressor is required")

    keep = np.isfinite(y) & np.all(np.isfinite(X), axis=1)
    y, X = y[keep], X[keep]
    n, m = X.shape
    if n <= m + 1:
        raise InsufficientData(f"{n} complete rows for {m} regressors plus intercept")
    Z = np.column_stack([np.ones(n), X])
    k = Z.shape[1]
    if np.linalg.matrix_rank(Z) < k:
        raise RankDeficient("design matrix with intercept is not full rank")

    bread = np.linalg.inv(Z.T @ Z)
    beta = bread @ (Z.T @ y)
    resid = y - Z @ beta
    meat = (Z * resid[:, None] ** 2).T @ Z
    cov = bread @ meat @ bread
    if cov_type == "hc1":
        cov *= n / (n - k)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / tss if tss > 0 else 1.0
    r2 = min(1.0, max(0.0, r2))
    with np.errstate(divide="ignore", invalid="ignore"):
        tvals = np.where(se > 0, beta / se, np.where(beta == 0, 0.0, np.inf))
    pvals = 2.0 * stats.t.sf(np.abs(tvals), df=n - k)
    return OlsResult(("const",) + names, beta, se, pvals, r2, n, cov_type)


def rank(panel, property, direction=None, top_k=10, ends="both"):
    """Order units by one property, best first.

    Default directions follow the best/worst performer table: decreasing
    level, decreasing trend, increasing relative volatility, increasing
    persistence. Ties are broken by unit id. With ``ends="both"`` the first
    and last ``top_k`` positions are kept; infinite ``rho`` values are left out
    of ``rho`` rankings and listed in ``excluded``. Persistence entries carry
    Ljung-Box significance stars.
    """
    if len(panel) == 0:
        raise EmptyPanel("cannot rank an empty panel")
    if property not in PROPERTIES:
        raise InvalidInput(f"property must be one of {PROPERTIES}, got {property!r}")
    direction = direction or DEFAULT_DIRECTION[property]
    if direction not in ("asc", "desc"):
        raise InvalidInput(f"direction must be 'asc' or 'desc', got {direction!r}")
    if ends not in ("both", "top", "bottom"):
        raise InvalidInput(f"ends must be 'both', 'top' or 'bottom', got {ends!r}")

    values = panel.column(property)
    finite = np.isfinite(values)
    excluded = tuple(u for u, ok in zip(panel.unit_ids, finite) if not ok)
    sign = -1.0 if direction == "desc" else 1.0
    order = sorted(
        (i for i in range(len(panel)) if finite[i]),
        key=lambda i: (sign * values[i], panel.unit_ids[i]),
    )
    entries = [
        RankEntry(
            pos + 1,
            panel.unit_ids[i],
            float(values[i]),
            significance_stars(panel.ljung_box_p[i]) if property == "pi" else "",
        )
        for pos, i in enumerate(order)
    ]
    if top_k is not None:
        top_k = check_int(top_k, "top_k", minimum=1)
        if ends == "top":
            entries = entries[:top_k]
        elif ends == "bottom":
            entries = entries[-top_k:]
        elif 2 * top_k < len(entries):
            entries = entries[:top_k] + entries[-top_k:]
    return Ranking(property, direction, tuple(entries), excluded)


def yearly_stats(levels, year_range=None):
    """Cross-sectional moments of the level across units, year by year.

    ``year_range`` is an inclusive ``(first, last)`` pair; by default the
    full span of the data. Units not observed in a year are skipped.
    """
    levels = list(levels)
    by_year: Dict[int, list] = {}
    for s in levels:
        for t, v in zip(s.times, s.values):
            by_year.setdefault(int(t), []).append(float(v))
    if year_range is None:
        if not by_year:
            raise EmptyYear("no observations")
        year_range = (min(by_year), max(by_year))
    first, last = int(year_range[0]), int(year_range[1])
    if first > last:
        raise InvalidInput(f"empty year range {year_range}")
    out = {}
    for year in range(first, last + 1):
        if year not in by_year:
            raise EmptyYear(f"no unit observed in {year}")
        out[year] = describe(by_year[year])
    return out


def _perm_pvalue(ra, rb, r_obs, n_perm, rng):
    perms = rng.permuted(np.tile(rb, (n_perm, 1)), axis=1)
    a = ra - ra.mean()
    b = perms - perms.mean(axis=1, keepdims=True)
    r = (b @ a) / np.sqrt((a @ a) * np.sum(b * b, axis=1))
    extreme = np.sum(np.abs(r) >= abs(r_obs) - 1e-12)
    return (1.0 + extreme) / (n_perm + 1.0)


def property_matrix(panel, n_permutations=1000, seed=0):
    """Pairwise Spearman correlations of level, trend, rho and pi.

    Two-sided p-values come from ``n_permutations`` random relabellings,
    each pair with its own generator seeded from ``(seed, i, j)``. Units with
    a non-finite property (an infinite ``rho``) are excluded and reported.
    """
    n_permutations = check_int(n_permutations, "n_permutations", minimum=1)
    cols = np.column_stack([panel.column(name) for name in PROPERTIES])
    finite = np.all(np.isfinite(cols), axis=1)
    excluded = tuple(u for u, ok in zip(panel.unit_ids, finite) if not ok)
    cols = cols[finite]
    if cols.shape[0] < 3:
        raise InsufficientData(f"need at least 3 units with finite properties, got {cols.shape[0]}")
    ranks = [rankdata(cols[:, j]) for j in range(len(PROPERTIES))]
    k = len(PROPERTIES)
    coef = np.eye(k)
    pval = np.full((k, k), math.nan)
    for i in range(k):
        for j in range(i + 1, k):
            r = spearman(cols[:, i], cols[:, j])
            rng = np.random.default_rng([seed, i, j])
            coef[i, j] = coef[j, i] = r
            pval[i, j] = pval[j, i] = _perm_pvalue(ranks[i], ranks[j], r, n_permutations, rng)
    return PropertyMatrix(PROPERTIES, coef, pval, int(cols.shape[0]), excluded)


class HC0Regression(RegressorMixin, BaseEstimator):
    """Linear regression with Huber-White standard errors.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    intercept_ : float
    bse_ : ndarray of shape (n_features + 1,)
        Robust standard errors, intercept first.
    result_ : OlsResult
    """

    def __init__(self, cov_type="hc0"):
        self.cov_type = cov_type

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        self.result_ = ols_hc0(y, X, cov_type=self.cov_type)
        self.intercept_ = float(self.result_.coefficients[0])
        self.coef_ = self.result_.coefficients[1:]
        self.bse_ = self.result_.hc0_se
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        X = np.asarray(X, dtype=float)
        return self.intercept_ + X @ self.coef_
