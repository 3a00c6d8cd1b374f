"""Compiled inner loops for ARMA estimation.

Order selection calls the CSS objective a few thousand times per series, so
the parameter transform, the residual recursion and the simplex search all
live here under numba.
"""

import math

import numpy as np
from numba import njit

AR_PACF_MAX = 1.0 - 1e-8


@njit(cache=True)
def pacf_to_coefs(r):
    """Durbin-Levinson map from partial autocorrelations to AR coefficients."""
    m = r.size
    phi = np.zeros(m)
    tmp = np.zeros(m)
    for k in range(m):
        rk = r[k]
        for i in range(k):
            tmp[i] = phi[i] - rk * phi[k - 1 - i]
        for i in range(k):
            phi[i] = tmp[i]
        phi[k] = rk
    return phi


@njit(cache=True)
def unpack(v, p, q):
    r_ar = np.empty(p)
    for i in range(p):
        r = math.tanh(v[1 + i])
        r_ar[i] = min(AR_PACF_MAX, max(-AR_PACF_MAX, r))
    r_ma = np.empty(q)
    for j in range(q):
        r_ma[j] = math.tanh(v[1 + p + j])
    return v[0], pacf_to_coefs(r_ar), -pacf_to_coefs(r_ma)


@njit(cache=True)
def css_residuals(x, g, betas, thetas):
    """Residuals of the ARMA recursion with zero pre-sample deviations and shocks."""
    n = x.size
    p = betas.size
    q = thetas.size
    e = np.empty(n)
    for t in range(n):
        acc = x[t] - g
        for i in range(1, p + 1):
            if t - i < 0:
                break
            acc -= betas[i - 1] * (x[t - i] - g)
        for j in range(1, q + 1):
            if t - j < 0:
                break
            acc -= thetas[j - 1] * e[t - j]
        e[t] = acc
    return e


@njit(cache=True)
def css_objective(v, z, p, q):
    """Concentrated negative log-likelihood up to a constant: ``n/2 log(SSR/n)``."""
    g, betas, thetas = unpack(v, p, q)
    e = css_residuals(z, g, betas, thetas)
    ssr = 0.0
    for t in range(e.size):
        ssr += e[t] * e[t]
    if not (ssr > 0.0) or not math.isfinite(ssr):
        return np.inf
    n = z.size
    return 0.5 * n * math.log(ssr / n)


@njit(cache=True)
def nelder_mead(z, p, q, x0, steps, max_iter, spread_tol):
    """Standard Nelder-Mead on ``css_objective``.

    Stops when the spread of objective values across the simplex falls below
    ``spread_tol``. Returns ``(x_best, f_best, converged, iterations)``.
    """
    dim = x0.size
    sim = np.empty((dim + 1, dim))
    fsim = np.empty(dim + 1)
    for i in range(dim + 1):
        for k in range(dim):
            sim[i, k] = x0[k]
        if i > 0:
            sim[i, i - 1] += steps[i - 1]
        fsim[i] = css_objective(sim[i], z, p, q)

    xbar = np.empty(dim)
    xr = np.empty(dim)
    xe = np.empty(dim)
    xc = np.empty(dim)
    converged = False
    it = 0
    while it < max_iter:
        order = np.argsort(fsim)
        sim = sim[order]
        fsim = fsim[order]
        if math.isfinite(fsim[dim]) and fsim[dim] - fsim[0] < spread_tol:
            converged = True
            break
        it += 1
        for k in range(dim):
            s = 0.0
            for i in range(dim):
                s += sim[i, k]
            xbar[k] = s / dim
        for k in range(dim):
            xr[k] = 2.0 * xbar[k] - sim[dim, k]
        fr = css_objective(xr, z, p, q)
        shrink = False
        if fr < fsim[0]:
            for k in range(dim):
                xe[k] = 3.0 * xbar[k] - 2.0 * sim[dim, k]
            fe = css_objective(xe, z, p, q)
            if fe < fr:
                sim[dim] = xe
                fsim[dim] = fe
            else:
                sim[dim] = xr
                fsim[dim] = fr
        elif fr < fsim[dim - 1]:
            sim[dim] = xr
            fsim[dim] = fr
        elif fr < fsim[dim]:
            for k in range(dim):
                xc[k] = 1.5 * xbar[k] - 0.5 * sim[dim, k]
            fc = css_objective(xc, z, p, q)
            if fc <= fr:
                sim[dim] = xc
                fsim[dim] = fc
            else:
                shrink = True
        else:
            for k in range(dim):
                xc[k] = 0.5 * xbar[k] + 0.5 * sim[dim, k]
            fc = css_objective(xc, z, p, q)
            if fc < fsim[dim]:
                sim[dim] = xc
                fsim[dim] = fc
            else:
                shrink = True
        if shrink:
            for i in range(1, dim + 1):
                for k in range(dim):
                    sim[i, k] = sim[0, k] + 0.5 * (sim[i, k] - sim[0, k])
                fsim[i] = css_objective(sim[i], z, p, q)
    best = np.argmin(fsim)
    return sim[best].copy(), fsim[best], converged and math.isfinite(fsim[best]), it
