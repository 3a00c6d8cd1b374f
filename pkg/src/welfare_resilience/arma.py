"""Conditional-likelihood estimation, simulation and AIC order selection for ARMA increments.

The increment model is

    D_t = g + sum_i beta_i (D_{t-i} - g) + sum_j theta_j e_{t-j} + e_t,

with i.i.d. shocks ``e_t`` of standard deviation ``sigma``. Estimation is
conditional maximum likelihood with pre-sample ``D - g`` and ``e`` set to
zero, which is the conditional-sum-of-squares (CSS) objective.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.signal import lfilter
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._kernels import css_residuals, nelder_mead, unpack
from ._validation import as_float_array, check_int, frozen
from .exceptions import (
    AllFitsFailed,
    ConvergenceFailure,
    DegenerateSeries,
    InvalidInput,
    InvalidParams,
    SeriesTooShort,
)
from .series import DescriptiveStats, IncrementSeries, describe

__all__ = [
    "ArmaSpec",
    "ArmaParams",
    "ArmaFit",
    "simulate",
    "loglik",
    "fit",
    "select_order",
    "ArmaModel",
]

MIN_FIT_LENGTH = 10
SHORT_SERIES_LENGTH = 50
MA_BOUNDARY_TOL = 1e-6
# candidate screen for order selection (see _screen_reason)
ROOT_SCREEN = 1.01
COMMON_ROOT_TOL = 0.1
MAX_ITER = 2000
SPREAD_TOL = 1e-9
N_RESTARTS = 5
_HESS_STEP = 1e-4


@dataclass(frozen=True, order=True)
class ArmaSpec:
    p: int
    q: int

    def __post_init__(self):
        check_int(self.p, "p", minimum=0)
        check_int(self.q, "q", minimum=0)

    @property
    def n_params(self):
        """AIC parameter count: AR and MA terms plus ``g`` and ``sigma``."""
        return self.p + self.q + 2

    def __str__(self):
        return f"ARMA({self.p},{self.q})"


@dataclass(frozen=True)
class ArmaParams:
    g: float
    betas: Tuple[float, ...] = ()
    thetas: Tuple[float, ...] = ()
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "g", float(self.g))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "betas", tuple(float(b) for b in np.atleast_1d(self.betas)))
        object.__setattr__(self, "thetas", tuple(float(t) for t in np.atleast_1d(self.thetas)))

    @property
    def spec(self):
        return ArmaSpec(len(self.betas), len(self.thetas))

    def validate(self, spec=None):
        """Raise :class:`InvalidParams` unless the parameters are admissible."""
        if spec is not None and spec != self.spec:
            raise InvalidParams(f"parameters have order {self.spec}, expected {spec}")
        values = (self.g, self.sigma) + self.betas + self.thetas
        if not all(math.isfinite(v) for v in values):
            raise InvalidParams("parameters must be finite")
        if self.sigma <= 0:
            raise InvalidParams(f"sigma must be positive, got {self.sigma}")
        if _min_root_modulus(-np.asarray(self.betas)) <= 1.0:
            raise InvalidParams(f"AR coefficients {self.betas} are not stationary")
        if _min_root_modulus(np.asarray(self.thetas)) < 1.0 - MA_BOUNDARY_TOL:
            raise InvalidParams(f"MA coefficients {self.thetas} are not invertible")
        return self

    @property
    def ma_on_boundary(self):
        """True when an MA root lies within tolerance of the unit circle."""
        return _min_root_modulus(np.asarray(self.thetas)) < 1.0 + MA_BOUNDARY_TOL


@dataclass(frozen=True)
class ArmaFit:
    """A fitted ARMA(p, q) increment model."""

    spec: ArmaSpec
    params: ArmaParams
    loglik: float
    aic: float
    residuals: np.ndarray = field(repr=False)
    se_g: float
    residual_stats: DescriptiveStats
    converged: bool = True
    warnings: Tuple[str, ...] = ()

    @property
    def n(self):
        return self.residuals.size

    @property
    def aicc(self):
        k = self.spec.n_params
        if self.n - k - 1 <= 0:
            return math.inf
        return self.aic + 2.0 * k * (k + 1) / (self.n - k - 1)

    def criterion(self, name="aic"):
        if name == "aic":
            return self.aic
        if name == "aicc":
            return self.aicc
        raise InvalidInput(f"unknown information criterion {name!r}")


def _roots(coefs):
    """Roots of ``1 + c_1 z + ... + c_m z^m``."""
    coefs = np.trim_zeros(np.asarray(coefs, dtype=float), "b")
    if coefs.size == 0:
        return np.zeros(0, dtype=complex)
    return np.roots(np.r_[coefs[::-1], 1.0])


def _min_root_modulus(coefs):
    """Smallest root modulus of ``1 + c_1 z + ... + c_m z^m`` (inf when constant)."""
    roots = _roots(coefs)
    return float(np.min(np.abs(roots))) if roots.size else math.inf


def _residuals(x, g, betas, thetas):
    """CSS residuals of ``x`` with zero pre-sample deviations and shocks."""
    return css_residuals(
        np.ascontiguousarray(x, dtype=float),
        float(g),
        np.asarray(betas, dtype=float).reshape(-1),
        np.asarray(thetas, dtype=float).reshape(-1),
    )


def _gaussian_loglik(resid, sigma):
    n = resid.size
    return -0.5 * n * math.log(2.0 * math.pi * sigma * sigma) - float(resid @ resid) / (
        2.0 * sigma * sigma
    )


def _increment_values(increments):
    if isinstance(increments, IncrementSeries):
        return increments.values
    return as_float_array(increments, "increments")


def loglik(params, spec, increments):
    """Conditional Gaussian log-likelihood of ``increments`` under ``params``."""
    x = _increment_values(increments)
    if spec != params.spec:
        raise InvalidParams(f"parameters have order {params.spec}, expected {spec}")
    if x.size < spec.p + spec.q + 2:
        raise SeriesTooShort(f"{spec} needs at least {spec.p + spec.q + 2} increments")
    if not params.sigma > 0:
        raise InvalidParams("sigma must be positive")
    resid = _residuals(x, params.g, params.betas, params.thetas)
    return _gaussian_loglik(resid, params.sigma)


def simulate(params, spec, n, seed):
    """Draw ``n`` increments from the model with an owned, seeded generator.

    Pre-sample increments equal ``g`` and pre-sample shocks are zero; the
    first ``max(100, 10 (p + q))`` draws are discarded as burn-in.
    """
    params.validate(spec)
    n = check_int(n, "n", minimum=1)
    rng = np.random.default_rng(seed)
    burn = max(100, 10 * (spec.p + spec.q))
    shocks = rng.normal(0.0, params.sigma, size=n + burn)
    x = lfilter(np.r_[1.0, params.thetas], np.r_[1.0, -np.asarray(params.betas)], shocks)
    return IncrementSeries.from_values(params.g + x[burn:], unit_id="simulated")


def _minimize(z, x0, p, q):
    steps = np.full(x0.size, 0.5)
    steps[0] = 0.25
    v, fv, ok, _ = nelder_mead(z, p, q, x0, steps, MAX_ITER, SPREAD_TOL)
    return v, float(fv), bool(ok)


def _observed_se_g(z, g, betas, thetas, sigma):
    """Standard error of ``g`` from a central-difference Hessian; None if not PD."""
    p, q = len(betas), len(thetas)
    x0 = np.r_[g, betas, thetas, sigma]

    def f(v):
        return _gaussian_loglik(_residuals(z, v[0], v[1 : 1 + p], v[1 + p : 1 + p + q]), v[-1])

    k = x0.size
    h = _HESS_STEP
    H = np.empty((k, k))
    f0 = f(x0)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h
        H[i, i] = (f(x0 + ei) - 2.0 * f0 + f(x0 - ei)) / (h * h)
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h
            H[i, j] = H[j, i] = (
                f(x0 + ei + ej) - f(x0 + ei - ej) - f(x0 - ei + ej) + f(x0 - ei - ej)
            ) / (4.0 * h * h)
    info = -H
    if not np.all(np.isfinite(info)):
        return None
    try:
        np.linalg.cholesky(info)
    except np.linalg.LinAlgError:
        return None
    var_g = np.linalg.inv(info)[0, 0]
    if not (math.isfinite(var_g) and var_g > 0):
        return None
    return math.sqrt(var_g)


def fit(increments, spec):
    """Maximise the conditional Gaussian likelihood over ``(g, beta, theta, sigma)``.

    The optimisation runs on standardised increments, so the result is
    equivariant under affine rescaling of the data. ``sigma`` is concentrated
    out (its ML value is the RMS residual) and AR/MA coefficients are searched
    through a partial-autocorrelation reparameterisation that keeps them
    admissible.

    Raises
    ------
    SeriesTooShort
        Fewer than ``max(p + q + 2, 10)`` increments.
    DegenerateSeries
        All increments equal.
    ConvergenceFailure
        The simplex search failed from every start; ``.best`` holds the best
        fit found.
    """
    x = _increment_values(increments)
    if not isinstance(spec, ArmaSpec):
        spec = ArmaSpec(*spec)
    n = x.size
    p, q = spec.p, spec.q
    if n < max(p + q + 2, MIN_FIT_LENGTH):
        raise SeriesTooShort(f"{spec} needs at least {max(p + q + 2, MIN_FIT_LENGTH)} increments, got {n}")
    if np.all(x == x[0]):
        raise DegenerateSeries("increments are constant; shock variance would be zero")
    warnings = []
    if n < SHORT_SERIES_LENGTH:
        warnings.append("short-series")

    loc = float(x.mean())
    scale = float(x.std(ddof=1))
    z = (x - loc) / scale

    if p == 0 and q == 0:
        resid = x - x.mean()
        sigma = math.sqrt(float(resid @ resid) / n)
        params = ArmaParams(float(x.mean()), (), (), sigma)
        ll = _gaussian_loglik(resid, sigma)
        return _make_fit(spec, params, ll, resid, sigma / math.sqrt(n), True, warnings)

    x0 = np.zeros(1 + p + q)
    best_v, best_f, ok = _minimize(z, x0, p, q)
    if ok:
        # a second simplex from the optimum guards against premature collapse
        v2, f2, ok2 = _minimize(z, best_v, p, q)
        if ok2 and f2 <= best_f:
            best_v, best_f = v2, f2
    else:
        for attempt in range(N_RESTARTS):
            jitter = np.random.default_rng(attempt).normal(0.0, 0.5, size=x0.size)
            v, fv, ok = _minimize(z, x0 + jitter, p, q)
            if fv < best_f:
                best_v, best_f = v, fv
            if ok:
                break
        if ok:
            warnings.append("convergence-fallback")

    gz, betas, thetas = unpack(best_v, p, q)
    resid_z = _residuals(z, gz, betas, thetas)
    sigma_z = math.sqrt(float(resid_z @ resid_z) / n)

    params = ArmaParams(loc + scale * gz, tuple(betas), tuple(thetas), scale * sigma_z)
    resid = scale * resid_z
    ll = _gaussian_loglik(resid, params.sigma) if math.isfinite(best_f) else -math.inf

    se_g = None
    if ok and math.isfinite(ll):
        se_z = _observed_se_g(z, gz, betas, thetas, sigma_z)
        if se_z is not None:
            se_g = scale * se_z
    if se_g is None:
        se_g = scale / math.sqrt(n)
        warnings.append("se-g-fallback")
    if params.ma_on_boundary:
        warnings.append("boundary-ma")

    result = _make_fit(spec, params, ll, resid, se_g, ok, warnings)
    if not ok:
        raise ConvergenceFailure(f"{spec} did not converge after {N_RESTARTS} restarts", best=result)
    return result


def _make_fit(spec, params, ll, resid, se_g, converged, warnings):
    resid = frozen(np.asarray(resid, dtype=float))
    return ArmaFit(
        spec=spec,
        params=params,
        loglik=ll,
        aic=2.0 * spec.n_params - 2.0 * ll,
        residuals=resid,
        se_g=se_g,
        residual_stats=describe(resid),
        converged=converged,
        warnings=tuple(warnings),
    )


def _screen_reason(fit_):
    """Why a candidate is unfit for order comparison, or ``None``.

    The conditional likelihood has no determinant term, so it rewards
    near-unit AR roots and near-cancelling AR/MA factors that the exact
    likelihood would penalise. Such candidates are dropped from the
    comparison. A unit MA root is still admissible in a pure MA model, which
    is how a deterministic trend shows up in the increments.
    """
    ar = _roots(-np.asarray(fit_.params.betas))
    ma = _roots(np.asarray(fit_.params.thetas))
    if ar.size and np.min(np.abs(ar)) < ROOT_SCREEN:
        return "near-unit AR root"
    if ar.size and ma.size:
        if np.min(np.abs(ma)) < ROOT_SCREEN:
            return "near-unit MA root in a mixed model"
        if np.min(np.abs(ar[:, None] - ma[None, :])) < COMMON_ROOT_TOL:
            return "near-common AR/MA factor"
    return None


def _selection_key(fit_, criterion):
    return (fit_.criterion(criterion), fit_.spec.p + fit_.spec.q, fit_.spec.p)


def best_fit(fits, criterion="aic"):
    """Minimum-criterion fit; ties go to smaller ``p + q``, then smaller ``p``."""
    fits = list(fits)
    if not fits:
        raise AllFitsFailed("no candidate fits")
    return min(fits, key=lambda f: _selection_key(f, criterion))


def select_order(increments, max_p=2, max_q=2, criterion="aic", screen=True, return_all=False):
    """Fit every order on the ``0..max_p x 0..max_q`` grid and keep the best.

    Specs whose fit raises are skipped, and with ``screen=True`` so are
    candidates with near-unit AR roots or redundant AR/MA factors. With
    ``return_all=True`` the list of successful candidate fits (screened or
    not) is returned alongside the winner.
    """
    x = _increment_values(increments)
    max_p = check_int(max_p, "max_p", minimum=0)
    max_q = check_int(max_q, "max_q", minimum=0)
    if x.size < MIN_FIT_LENGTH:
        raise SeriesTooShort(f"order selection needs at least {MIN_FIT_LENGTH} increments")
    if np.all(x == x[0]):
        raise DegenerateSeries("increments are constant; shock variance would be zero")
    fits = []
    errors = []
    for p in range(max_p + 1):
        for q in range(max_q + 1):
            try:
                fits.append(fit(x, ArmaSpec(p, q)))
            except (ConvergenceFailure, SeriesTooShort) as exc:
                errors.append(f"ARMA({p},{q}): {exc}")
    candidates = fits
    if screen:
        candidates = [f for f in fits if _screen_reason(f) is None]
        errors.extend(f"{f.spec}: {_screen_reason(f)}" for f in fits if _screen_reason(f))
    if not candidates:
        raise AllFitsFailed("; ".join(errors) or "empty order grid")
    winner = best_fit(candidates, criterion)
    return (winner, fits) if return_all else winner


class ArmaModel(BaseEstimator):
    """ARMA increment model with scikit-learn style ``fit``.

    Parameters
    ----------
    order : tuple of int, optional
        Fixed ``(p, q)``. When ``None`` the order is chosen on the grid
        ``0..max_p x 0..max_q`` by ``criterion``.
    max_p, max_q : int, default=2
    criterion : {"aic", "aicc"}, default="aic"
    screen : bool, default=True
        Drop candidates with near-unit AR roots or redundant AR/MA factors
        during order selection.

    Attributes
    ----------
    fit_ : ArmaFit
    params_ : ArmaParams
    spec_ : ArmaSpec
    persistence_ : float
        Sum of all AR and MA coefficients.
    """

    def __init__(self, order=None, max_p=2, max_q=2, criterion="aic", screen=True):
        self.order = order
        self.max_p = max_p
        self.max_q = max_q
        self.criterion = criterion
        self.screen = screen

    def fit(self, X, y=None):
        x = _increment_values(np.ravel(X))
        if self.order is None:
            self.fit_ = select_order(x, self.max_p, self.max_q, self.criterion, self.screen)
        else:
            self.fit_ = fit(x, ArmaSpec(*self.order))
        self.params_ = self.fit_.params
        self.spec_ = self.fit_.spec
        self.persistence_ = float(sum(self.params_.betas) + sum(self.params_.thetas))
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        """One-step-ahead conditional means of the increments in ``X``."""
        check_is_fitted(self, "fit_")
        x = _increment_values(np.ravel(X))
        pr = self.params_
        return x - _residuals(x, pr.g, pr.betas, pr.thetas)

    def score(self, X, y=None):
        """Conditional log-likelihood of ``X`` under the fitted parameters."""
        check_is_fitted(self, "fit_")
        return loglik(self.params_, self.spec_, np.ravel(X))

    def sample(self, n, seed=None):
        check_is_fitted(self, "fit_")
        return simulate(self.params_, self.spec_, n, seed).values
