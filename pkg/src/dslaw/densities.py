"""Closed-form densities, scaling functions, and conditional laws.

Everything here is a pure function of (DslParams, ReferenceScales) and is
vectorized over its data arguments: scalars in, float out; arrays in,
arrays out.  Raw-variable densities (per unit sales/labor) differ from the
log-variable Gaussians by 1/Y or 1/L Jacobians.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .model import (
    DslParams,
    GaussianLogModel,
    PowerLawParams,
    ReferenceScales,
    derive_productivity,
    require_lognormal,
    to_gaussian,
)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _positive(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0)):
        raise DomainError(f"{name} must be positive and finite")
    return arr


def _ret(template, out: np.ndarray):
    """Return a float for scalar input, else the array."""
    if np.isscalar(template) or getattr(template, "ndim", 1) == 0:
        return float(out)
    return out


def _norm_pdf(x: np.ndarray, mean: float, var: float) -> np.ndarray:
    return np.exp(-0.5 * (x - mean) ** 2 / var) / (math.sqrt(var) * _SQRT_2PI)


def _lognorm_pdf(x: np.ndarray, x0: float, ln_mean: float, ln_var: float) -> np.ndarray:
    return _norm_pdf(np.log(x / x0), ln_mean, ln_var) / x


def _gauss2_pdf(l: np.ndarray, y: np.ndarray, g: GaussianLogModel) -> np.ndarray:
    det = g.sig_ll * g.sig_yy - g.sig_ly**2
    dl = l - g.mu_l
    dy = y - g.mu_y
    quad = (g.sig_yy * dl * dl - 2.0 * g.sig_ly * dl * dy + g.sig_ll * dy * dy) / det
    return np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))


def log_joint_density(y, l, params: DslParams, scales: ReferenceScales | None = None):
    """Unnormalized log of the raw-variable joint density at log coordinates (y, l).

    Equals ln P_YL(Y, L) - ln P_YL(Y0, L0):
    -alpha*p*l**2 + 2*alpha*beta*p*l*y - beta*p*y**2 + s*l + q*y.
    Vanishes at the reference point y = l = 0.
    """
    a, b, p = params.alpha, params.beta, params.p
    y = np.asarray(y, dtype=float)
    l_arr = np.asarray(l, dtype=float)
    out = -a * p * l_arr**2 + 2.0 * a * b * p * l_arr * y - b * p * y**2 + params.s * l_arr + params.q * y
    return _ret(y if y.ndim else l, out)


def joint_pdf(sales, labor, params: DslParams, scales: ReferenceScales | None = None):
    """Normalized joint density of (sales, labor), per unit sales and labor."""
    scales = scales or ReferenceScales()
    sales_a = _positive(sales, "sales")
    labor_a = _positive(labor, "labor")
    g = to_gaussian(params)
    l = np.log(labor_a / scales.l0)
    y = np.log(sales_a / scales.y0)
    out = _gauss2_pdf(l, y, g) / (sales_a * labor_a)
    return _ret(sales, out)


def marginal_pdf_L(labor, params, scales: ReferenceScales | None = None):
    """Marginal density of labor.

    DslParams on the lognormal branch give a lognormal; PowerLawParams give
    the Pareto density mu_l/L0 * (L/L0)**(-mu_l-1) on support L >= L0.
    """
    scales = scales or ReferenceScales()
    labor_a = _positive(labor, "labor")
    if isinstance(params, PowerLawParams):
        rel = labor_a / scales.l0
        out = np.where(rel >= 1.0, params.mu_l / scales.l0 * rel ** (-params.mu_l - 1.0), 0.0)
        return _ret(labor, out)
    g = to_gaussian(params)
    out = _norm_pdf(np.log(labor_a / scales.l0), g.mu_l, g.sig_ll) / labor_a
    return _ret(labor, out)


def marginal_pdf_Y(sales, params, scales: ReferenceScales | None = None):
    """Marginal density of sales; see marginal_pdf_L."""
    scales = scales or ReferenceScales()
    sales_a = _positive(sales, "sales")
    if isinstance(params, PowerLawParams):
        rel = sales_a / scales.y0
        out = np.where(rel >= 1.0, params.mu_y / scales.y0 * rel ** (-params.mu_y - 1.0), 0.0)
        return _ret(sales, out)
    g = to_gaussian(params)
    out = _norm_pdf(np.log(sales_a / scales.y0), g.mu_y, g.sig_yy) / sales_a
    return _ret(sales, out)


def scaling_function_Y(sales, params: DslParams, scales: ReferenceScales | None = None):
    """Invariant function of sales, normalized to unit integral.

    A lognormal density in its argument with log curvature -beta*p and tilt
    q; conditionals of sales at any labor level collapse onto it after
    power-law rescaling.
    """
    scales = scales or ReferenceScales()
    require_lognormal(params)
    sales_a = _positive(sales, "sales")
    ln_var = 1.0 / (2.0 * params.beta * params.p)
    ln_mean = (params.q + 1.0) * ln_var
    return _ret(sales, _lognorm_pdf(sales_a, scales.y0, ln_mean, ln_var))


def scaling_function_L(labor, params: DslParams, scales: ReferenceScales | None = None):
    """Invariant function of labor, normalized to unit integral."""
    scales = scales or ReferenceScales()
    require_lognormal(params)
    labor_a = _positive(labor, "labor")
    ln_var = 1.0 / (2.0 * params.alpha * params.p)
    ln_mean = (params.s + 1.0) * ln_var
    return _ret(labor, _lognorm_pdf(labor_a, scales.l0, ln_mean, ln_var))


def conditional_pdf_Y_given_L(sales, labor, params: DslParams, scales: ReferenceScales | None = None):
    """Density of sales at fixed labor: (L/L0)**(-alpha) * Phi_Y of the rescaled sales."""
    scales = scales or ReferenceScales()
    labor_a = _positive(labor, "labor")
    factor = (labor_a / scales.l0) ** (-params.alpha)
    out = factor * scaling_function_Y(factor * np.asarray(sales, dtype=float), params, scales)
    return _ret(sales, np.asarray(out))


def conditional_pdf_L_given_Y(labor, sales, params: DslParams, scales: ReferenceScales | None = None):
    """Density of labor at fixed sales: the mirror scaling law with exponent beta."""
    scales = scales or ReferenceScales()
    sales_a = _positive(sales, "sales")
    factor = (sales_a / scales.y0) ** (-params.beta)
    out = factor * scaling_function_L(factor * np.asarray(labor, dtype=float), params, scales)
    return _ret(labor, np.asarray(out))


def productivity_joint_pdf(prod, labor, params: DslParams, scales: ReferenceScales | None = None):
    """Joint density of (productivity, labor): L times the joint density at (C*L, L)."""
    scales = scales or ReferenceScales()
    prod_a = _positive(prod, "productivity")
    labor_a = _positive(labor, "labor")
    out = labor_a * joint_pdf(prod_a * labor_a, labor_a, params, scales)
    return _ret(prod, np.asarray(out))


def marginal_pdf_C(prod, params: DslParams, scales: ReferenceScales | None = None):
    """Marginal density of productivity C = Y/L (lognormal branch)."""
    scales = scales or ReferenceScales()
    prod_a = _positive(prod, "productivity")
    g = to_gaussian(params)
    out = _norm_pdf(np.log(prod_a / scales.c0), g.mu_c, g.var_c) / prod_a
    return _ret(prod, out)


def expected_L_given_C(prod, params: DslParams, scales: ReferenceScales | None = None):
    """Conditional mean of labor at fixed productivity.

    Proportional to (C/C0)**beta_t; the constant is the exact lognormal
    conditional mean L0*exp(E(l|c) + Var(l|c)/2).
    """
    scales = scales or ReferenceScales()
    prod_a = _positive(prod, "productivity")
    g = to_gaussian(params)
    pp = derive_productivity(params)
    c = np.log(prod_a / scales.c0)
    out = scales.l0 * np.exp(g.mu_l + pp.beta_t * (c - g.mu_c) + 0.5 * g.var_l_given_c)
    return _ret(prod, out)


def expected_L_given_C_slope(params: DslParams) -> float:
    """Log-log slope of E(L|C), equal to beta_t."""
    return derive_productivity(params).beta_t


def psi_L(u, params: DslParams, scales: ReferenceScales | None = None):
    """Invariant function of labor conditioned on productivity, unit integral.

    A lognormal in its argument whose log curvature is -alpha_t*p_t
    (= -(alpha+beta-2*alpha*beta)*p), read off the exact Gaussian
    conditional of l given c.
    """
    scales = scales or ReferenceScales()
    u_a = _positive(u, "scaled labor")
    g = to_gaussian(params)
    pp = derive_productivity(params)
    ln_var = g.var_l_given_c
    ln_mean = g.mu_l - pp.beta_t * g.mu_c
    return _ret(u, _lognorm_pdf(u_a, scales.l0, ln_mean, ln_var))


def conditional_pdf_L_given_C(labor, prod, params: DslParams, scales: ReferenceScales | None = None):
    """Density of labor at fixed productivity via the productivity scaling law."""
    scales = scales or ReferenceScales()
    prod_a = _positive(prod, "productivity")
    pp = derive_productivity(params)
    factor = (prod_a / scales.c0) ** (-pp.beta_t)
    out = factor * psi_L(factor * np.asarray(labor, dtype=float), params, scales)
    return _ret(labor, np.asarray(out))
