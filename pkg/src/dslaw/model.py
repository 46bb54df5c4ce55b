"""Parameter sets of the scaling-law density family and their derived forms.

Conventions used throughout the package: sales Y and labor L enter in log
coordinates y = ln(Y/Y0) and l = ln(L/L0) relative to a pair of reference
scales.  On the normalizable branch (alpha*beta < 1) the joint density of
(Y, L) is lognormal: Gaussian in (l, y) with precision matrix

    [[2*alpha*p, -2*alpha*beta*p], [-2*alpha*beta*p, 2*beta*p]]

and linear coefficient (s + 1, q + 1).  The two +1 shifts carry the 1/(Y*L)
Jacobian between densities in raw and in log variables; with them the log
marginals come out with quadratic/linear coefficients
(-alpha*(1-alpha*beta)*p, s+(q+1)*alpha) in l and the mirror in y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, NonNormalizableError, SingularProductivityError

#: Half-width of the band around alpha*beta == 1 classified as the power-law branch.
BRANCH_EPS = 1e-9

#: Threshold below which the productivity reparametrization is treated as singular.
SINGULAR_EPS = 1e-9


class Branch(str, Enum):
    """Solution branch of the scaling relations."""

    LOGNORMAL = "lognormal"
    POWER_LAW = "power-law"


@dataclass(frozen=True)
class ReferenceScales:
    """Reference sales/labor scales anchoring the log coordinates.

    The defaults sit inside the empirical scaling region of the firm data
    this family models: l0 = 10**1.5 workers, y0 = 10**5.5 currency units.
    """

    y0: float = 10**5.5
    l0: float = 10**1.5

    def __post_init__(self):
        if not (self.y0 > 0 and math.isfinite(self.y0)):
            raise ValueError(f"y0 must be positive and finite, got {self.y0}")
        if not (self.l0 > 0 and math.isfinite(self.l0)):
            raise ValueError(f"l0 must be positive and finite, got {self.l0}")

    @property
    def c0(self) -> float:
        """Productivity scale, exactly y0 / l0."""
        return self.y0 / self.l0


@dataclass(frozen=True)
class DslParams:
    """The five scalars defining the joint density family.

    alpha and beta are the slopes of the conditional means E(y|l) and E(l|y);
    p is the log-quadratic curvature scale; q and s tilt the invariant
    functions of sales and labor.  q = s = 0 puts the mode of the raw-variable
    joint density at the reference point (y0, l0).
    """

    alpha: float
    beta: float
    p: float
    q: float = 0.0
    s: float = 0.0

    @property
    def alpha_beta(self) -> float:
        return self.alpha * self.beta


@dataclass(frozen=True)
class GaussianLogModel:
    """Mean pair and covariance of (l, y) = (ln L/L0, ln Y/Y0)."""

    mu_l: float
    mu_y: float
    sig_ll: float
    sig_ly: float
    sig_yy: float

    def __post_init__(self):
        if not (self.sig_ll > 0 and self.sig_yy > 0):
            raise ValueError("diagonal covariance entries must be positive")
        if self.sig_ll * self.sig_yy - self.sig_ly**2 <= 0:
            raise ValueError("covariance of (l, y) must be positive definite")

    @property
    def correlation(self) -> float:
        return self.sig_ly / math.sqrt(self.sig_ll * self.sig_yy)

    @property
    def slope_y_on_l(self) -> float:
        """Slope of the conditional mean E(y|l)."""
        return self.sig_ly / self.sig_ll

    @property
    def slope_l_on_y(self) -> float:
        return self.sig_ly / self.sig_yy

    @property
    def var_y_given_l(self) -> float:
        return self.sig_yy - self.sig_ly**2 / self.sig_ll

    @property
    def var_l_given_y(self) -> float:
        return self.sig_ll - self.sig_ly**2 / self.sig_yy

    # log productivity c = y - l is Gaussian as well
    @property
    def mu_c(self) -> float:
        return self.mu_y - self.mu_l

    @property
    def var_c(self) -> float:
        return self.sig_yy + self.sig_ll - 2.0 * self.sig_ly

    @property
    def cov_lc(self) -> float:
        return self.sig_ly - self.sig_ll

    @property
    def slope_l_on_c(self) -> float:
        return self.cov_lc / self.var_c

    @property
    def var_l_given_c(self) -> float:
        return self.sig_ll - self.cov_lc**2 / self.var_c

    def cholesky(self) -> tuple[float, float, float]:
        """Lower-triangular factor (a, b, c): l = mu_l + a*z0, y = mu_y + b*z0 + c*z1."""
        a = math.sqrt(self.sig_ll)
        b = self.sig_ly / a
        return a, b, math.sqrt(self.sig_yy - b * b)

    def marginal_log_coeffs(self, which: str) -> tuple[float, float]:
        """(quadratic, linear) coefficients of the log of the raw-variable marginal.

        For which='L' these are the coefficients of l in
        ln P_L(L) - ln P_L(L0); the extra -1 in the linear term is the
        1/L Jacobian of the density in raw units.
        """
        if which == "L":
            return -0.5 / self.sig_ll, self.mu_l / self.sig_ll - 1.0
        if which == "Y":
            return -0.5 / self.sig_yy, self.mu_y / self.sig_yy - 1.0
        raise ValueError(f"which must be 'L' or 'Y', got {which!r}")


@dataclass(frozen=True)
class PowerLawParams:
    """Pareto exponents of the two marginals on the alpha*beta == 1 branch."""

    mu_l: float
    mu_y: float

    def __post_init__(self):
        if not (self.mu_l > 0 and self.mu_y > 0):
            raise ValueError("Pareto exponents must be positive")

    @property
    def alpha(self) -> float:
        return self.mu_l / self.mu_y

    @property
    def beta(self) -> float:
        return self.mu_y / self.mu_l

    @property
    def a(self) -> float:
        """Exponent of the power-law prefactor tying the two invariant functions."""
        return -(self.mu_l + self.mu_y + self.mu_l * self.mu_y) / self.mu_y


@dataclass(frozen=True)
class ProductivityParams:
    """Exponents of the joint density of (productivity, labor).

    alpha_t, beta_t, p_t play the roles of alpha, beta, p after the change
    of variables C = Y/L.  gamma1 and gamma2 are the curvature and tilt of
    the Gaussian density of c = ln(C/C0); q_t is the tilt of the invariant
    function of labor conditioned on productivity.
    """

    alpha_t: float
    beta_t: float
    p_t: float
    gamma1: float
    gamma2: float
    q_t: float


def validate_params(params: DslParams) -> Branch:
    """Classify a parameter set, raising if it cannot define a density.

    Returns Branch.POWER_LAW when alpha*beta is within BRANCH_EPS of 1,
    Branch.LOGNORMAL when the quadratic form is positive definite
    (alpha, beta, p > 0 and alpha*beta < 1), and raises
    NonNormalizableError otherwise.
    """
    a, b, p = params.alpha, params.beta, params.p
    for name, v in (("alpha", a), ("beta", b), ("p", p), ("q", params.q), ("s", params.s)):
        if not math.isfinite(v):
            raise NonNormalizableError(f"{name} must be finite, got {v}")
    if a <= 0 or b <= 0:
        raise NonNormalizableError(f"alpha and beta must be positive, got alpha={a}, beta={b}")
    ab = a * b
    if ab > 1.0 + BRANCH_EPS:
        raise NonNormalizableError(
            f"alpha*beta = {ab:.6g} > 1: the quadratic form is indefinite and the joint density not normalizable"
        )
    if p <= 0:
        raise NonNormalizableError(f"p must be positive, got {p}")
    if abs(ab - 1.0) <= BRANCH_EPS:
        return Branch.POWER_LAW
    return Branch.LOGNORMAL


def require_lognormal(params: DslParams) -> None:
    """Raise unless params sit on the lognormal branch."""
    if validate_params(params) is not Branch.LOGNORMAL:
        raise NonNormalizableError(
            "operation defined only on the lognormal branch (alpha*beta < 1)"
        )


def to_gaussian(params: DslParams, scales: ReferenceScales | None = None) -> GaussianLogModel:
    """Normalized Gaussian form of the joint density in log coordinates.

    The covariance is the inverse of the precision matrix
    [[2ap, -2abp], [-2abp, 2bp]], written in the factored form
    sig_ll = 1/(2*a*p*(1-ab)) etc. so it stays accurate arbitrarily close to
    the power-law boundary ab -> 1, where the matrix is ill-conditioned.
    The mean is covariance times (s + 1, q + 1).  The reference scales only
    fix the origin of the log coordinates; the returned numbers do not
    depend on them.
    """
    require_lognormal(params)
    a, b, p = params.alpha, params.beta, params.p
    gap = 1.0 - a * b
    sig_ll = 1.0 / (2.0 * a * p * gap)
    sig_yy = 1.0 / (2.0 * b * p * gap)
    sig_ly = 1.0 / (2.0 * p * gap)
    s1 = params.s + 1.0
    q1 = params.q + 1.0
    return GaussianLogModel(
        mu_l=sig_ll * s1 + sig_ly * q1,
        mu_y=sig_ly * s1 + sig_yy * q1,
        sig_ll=sig_ll,
        sig_ly=sig_ly,
        sig_yy=sig_yy,
    )


def powerlaw_relations(mu_l: float, mu_y: float) -> tuple[float, float, float]:
    """Map Pareto exponents of the two marginals to (alpha, beta, a).

    alpha = mu_l/mu_y and beta = mu_y/mu_l, so alpha*beta == 1 identically;
    a = -(mu_l + mu_y + mu_l*mu_y)/mu_y ties the two invariant functions.
    """
    if mu_l <= 0 or mu_y <= 0:
        raise DomainError(f"Pareto exponents must be positive, got mu_l={mu_l}, mu_y={mu_y}")
    alpha = mu_l / mu_y
    beta = mu_y / mu_l
    a = -(mu_l + mu_y + mu_l * mu_y) / mu_y
    return alpha, beta, a


def derive_productivity(params: DslParams) -> ProductivityParams:
    """Exponents of the (productivity, labor) density implied by params.

    With d = alpha + beta - 2*alpha*beta:
        alpha_t = alpha - 1
        beta_t  = beta*(alpha - 1)/d
        p_t     = d*p/(alpha - 1)
        gamma1  = alpha*beta*(1 - alpha*beta)*p/d
    gamma2 and q_t have no closed form of their own here; they are read off
    the Gaussian log model: gamma2 = 2*gamma1*mean(c) and q_t from the
    conditional mean of l given c (analytically q_t == s + q + 1).
    """
    require_lognormal(params)
    a, b, p = params.alpha, params.beta, params.p
    d = a + b - 2.0 * a * b
    if abs(a - 1.0) <= SINGULAR_EPS or abs(d) <= SINGULAR_EPS:
        raise SingularProductivityError(
            f"productivity exponents degenerate at alpha={a}, alpha+beta-2*alpha*beta={d}"
        )
    alpha_t = a - 1.0
    beta_t = b * (a - 1.0) / d
    p_t = d * p / (a - 1.0)
    gamma1 = a * b * (1.0 - a * b) * p / d
    g = to_gaussian(params)
    gamma2 = 2.0 * gamma1 * g.mu_c
    q_t = 2.0 * alpha_t * p_t * (g.mu_l - beta_t * g.mu_c) - 1.0
    return ProductivityParams(
        alpha_t=alpha_t, beta_t=beta_t, p_t=p_t, gamma1=gamma1, gamma2=gamma2, q_t=q_t
    )
