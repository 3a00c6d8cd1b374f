"""Unit-root (augmented Dickey-Fuller) and portmanteau (Ljung-Box) tests."""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy.special import gammaincc

from ._validation import as_float_array, check_int
from .exceptions import InvalidInput, LagTooLarge, SeriesTooShort, SingularRegression
from .series import acf

__all__ = [
    "AdfResult",
    "LjungBoxResult",
    "adf_test",
    "ljung_box",
    "chi_square_sf",
    "significance_stars",
    "default_ljung_box_lags",
]

LEVELS = ("1%", "5%", "10%")
KINDS = ("c", "ct")
ADF_MIN_LENGTH = 20

# MacKinnon (2010) response surfaces, one unit root: cv(T) = b0 + b1/T + b2/T^2 + b3/T^3
_TAU_SURFACE = {
    "c": {
        "1%": (-3.43035, -6.5393, -16.786, -79.433),
        "5%": (-2.86154, -2.8903, -4.234, -40.040),
        "10%": (-2.56677, -1.5384, -2.809, 0.0),
    },
    "ct": {
        "1%": (-3.95877, -9.0531, -28.428, -134.155),
        "5%": (-3.41049, -4.3904, -9.036, -45.374),
        "10%": (-3.12705, -2.5856, -3.925, -22.380),
    },
}

# Dickey-Fuller (1981) joint-F tables: phi1 for "c", phi3 for "ct"
_PHI_SIZES = (25, 50, 100, 250, 500, math.inf)
_PHI_TABLE = {
    "c": {
        "1%": (7.88, 7.06, 6.70, 6.52, 6.47, 6.43),
        "5%": (5.18, 4.86, 4.71, 4.63, 4.61, 4.59),
        "10%": (4.12, 3.94, 3.86, 3.81, 3.79, 3.78),
    },
    "ct": {
        "1%": (10.61, 9.31, 8.73, 8.43, 8.34, 8.27),
        "5%": (7.24, 6.73, 6.49, 6.34, 6.30, 6.25),
        "10%": (5.91, 5.61, 5.47, 5.39, 5.36, 5.34),
    },
}


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    lags_used: int
    regression_kind: str
    nobs: int
    critical_values: Dict[str, float]
    decision_at: Dict[str, bool]
    variant: str = "tau"

    def rejects(self, level="5%"):
        """True when the unit-root null is rejected at ``level``."""
        return self.decision_at[level]


@dataclass(frozen=True)
class LjungBoxResult:
    q_statistic: float
    lags: int
    p_value: float
    df: int = field(default=0)

    @property
    def stars(self):
        return significance_stars(self.p_value)


def significance_stars(p_value):
    """``***`` below 0.01, ``**`` below 0.05, ``*`` below 0.1."""
    if p_value is None or not math.isfinite(p_value):
        return ""
    if p_value < 0.01:
        return "***"
    if p_value < 0.05:
        return "**"
    if p_value < 0.1:
        return "*"
    return ""


def chi_square_sf(x, df):
    """Upper tail probability of a chi-square variable with ``df`` degrees of freedom."""
    x = float(x)
    df = check_int(df, "df", minimum=1)
    if math.isnan(x) or x < 0:
        raise InvalidInput(f"chi-square argument must be non-negative, got {x}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return float(min(1.0, max(0.0, gammaincc(0.5 * df, 0.5 * x))))


def default_ljung_box_lags(n):
    return max(1, min(10, n // 5))


def ljung_box(values, lags=None, model_df=0):
    """Ljung-Box portmanteau test.

    ``model_df`` is the number of fitted ARMA coefficients (``p + q``) when
    testing residuals; the chi-square reference then has
    ``max(1, lags - model_df)`` degrees of freedom.
    """
    x = as_float_array(values)
    n = x.size
    lags = default_ljung_box_lags(n) if lags is None else check_int(lags, "lags", minimum=1)
    model_df = check_int(model_df, "model_df", minimum=0)
    if n <= lags + 1:
        raise LagTooLarge(f"ljung_box with {lags} lags needs more than {lags + 1} points, got {n}")
    r = acf(x, lags).coefficients[1:]
    s = np.arange(1, lags + 1)
    q = float(n * (n + 2) * np.sum(r**2 / (n - s)))
    df = max(1, lags - model_df) if model_df else lags
    return LjungBoxResult(q, lags, chi_square_sf(q, df), df)


def _ols(y, X):
    """Return (coefficients, residual sum of squares, (X'X)^-1)."""
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise SingularRegression("regressors are collinear")
    xtx_inv = np.linalg.inv(X.T @ X)
    beta = xtx_inv @ (X.T @ y)
    resid = y - X @ beta
    return beta, float(resid @ resid), xtx_inv


def _adf_design(x, lags, start, kind):
    """Regression of dx_i on x_i, deterministics and dx_{i-1..i-lags} for i >= start."""
    dx = np.diff(x)
    idx = np.arange(start, dx.size)
    cols = [x[idx], np.ones(idx.size)]
    if kind == "ct":
        cols.append(idx.astype(float))
    cols.extend(dx[idx - j] for j in range(1, lags + 1))
    return dx[idx], np.column_stack(cols)


def _tau_critical(kind, nobs):
    return {
        lvl: float(sum(b / nobs**k for k, b in enumerate(coefs)))
        for lvl, coefs in _TAU_SURFACE[kind].items()
    }


def _phi_critical(kind, nobs):
    inv = [0.0 if math.isinf(t) else 1.0 / t for t in _PHI_SIZES]
    grid = np.array(inv[::-1])
    out = {}
    for lvl, values in _PHI_TABLE[kind].items():
        out[lvl] = float(np.interp(1.0 / nobs, grid, np.array(values[::-1])))
    return out


def adf_test(series, kind="c", max_lag="auto", variant="tau"):
    """Augmented Dickey-Fuller test for a unit root.

    Parameters
    ----------
    series : array-like
        At least 20 observations.
    kind : {"c", "ct"}
        Constant only, or constant plus linear trend.
    max_lag : int or "auto"
        With ``"auto"`` the augmentation order is chosen by AIC over
        ``0..floor((n - 1) ** (1/3))`` on a common estimation sample, then the
        chosen regression is re-estimated on all usable observations.
    variant : {"tau", "joint_f"}
        ``"tau"`` is the t-ratio on the lagged level, compared with MacKinnon
        response-surface critical values. ``"joint_f"`` is the Dickey-Fuller
        F statistic for the unit root jointly with the highest deterministic
        term (phi1 for "c", phi3 for "ct").
    """
    x = as_float_array(series, "series")
    n = x.size
    if n < ADF_MIN_LENGTH:
        raise SeriesTooShort(f"ADF needs at least {ADF_MIN_LENGTH} observations, got {n}")
    if kind not in KINDS:
        raise InvalidInput(f"kind must be one of {KINDS}, got {kind!r}")
    if variant not in ("tau", "joint_f"):
        raise InvalidInput(f"variant must be 'tau' or 'joint_f', got {variant!r}")

    if max_lag == "auto":
        top = int(math.floor((n - 1) ** (1.0 / 3.0)))
        best = None
        for lags in range(top + 1):
            y, X = _adf_design(x, lags, top, kind)
            _, ssr, _ = _ols(y, X)
            if ssr <= 0:
                raise SingularRegression("ADF regression fits exactly")
            aic = y.size * math.log(ssr / y.size) + 2 * X.shape[1]
            if best is None or aic < best[0]:
                best = (aic, lags)
        lags = best[1]
    else:
        lags = check_int(max_lag, "max_lag", minimum=0)
        if n - 1 - lags < lags + 4:
            raise SeriesTooShort(f"too few observations for {lags} augmentation lags")

    y, X = _adf_design(x, lags, lags, kind)
    beta, ssr, xtx_inv = _ols(y, X)
    nobs, k = X.shape
    if ssr <= 0:
        raise SingularRegression("ADF regression fits exactly")
    s2 = ssr / (nobs - k)

    if variant == "tau":
        stat = float(beta[0] / math.sqrt(s2 * xtx_inv[0, 0]))
        crit = _tau_critical(kind, nobs)
        decision = {lvl: stat < crit[lvl] for lvl in LEVELS}
    else:
        # restricted model drops the lagged level and the highest deterministic term
        drop = {0, 1} if kind == "c" else {0, 2}
        keep = [j for j in range(k) if j not in drop]
        Xr = X[:, keep]
        if Xr.shape[1]:
            _, ssr_r, _ = _ols(y, Xr)
        else:
            ssr_r = float(y @ y)
        stat = float(((ssr_r - ssr) / 2.0) / s2)
        crit = _phi_critical(kind, nobs)
        decision = {lvl: stat > crit[lvl] for lvl in LEVELS}
    return AdfResult(stat, lags, kind, nobs, crit, decision, variant)
