"""Numerical verification of the scaling-relation consistency web.

feq_residual checks that a pair of candidate invariant functions satisfies
the joint functional equation the double scaling relations impose, on a log
grid of (sales, labor).  identity_suite checks every closed-form identity
tying the parameter set, its Gaussian log model, and the productivity
exponents together.  mc_cross_check bridges the analytic model and the
sampler through moment comparisons at Monte Carlo precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainExhaustedError
from .estimator import linear_fit
from .model import (
    DslParams,
    ReferenceScales,
    derive_productivity,
    require_lognormal,
    to_gaussian,
)
from .sampler import SynthesisSpec, sample_firms, sample_moments

#: Relative-residual floor guarding against division by vanishing densities.
RESIDUAL_FLOOR = 1e-300


@dataclass
class PhiGrid:
    """Tabulated positive function on strictly increasing positive abscissae.

    Evaluation interpolates linearly in (log abscissa, log value); outside
    the tabulated domain it returns NaN so callers can skip and count.
    """

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.x.ndim != 1 or self.x.size < 2 or self.x.size != self.values.size:
            raise ValueError("grid needs >= 2 paired points")
        if np.any(self.x <= 0) or np.any(np.diff(self.x) <= 0):
            raise ValueError("abscissae must be positive and strictly increasing")
        if np.any(self.values <= 0) or not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be positive and finite")
        self._log_x = np.log(self.x)
        self._log_f = np.log(self.values)

    @classmethod
    def from_function(cls, func, lo: float, hi: float, n: int = 4097) -> "PhiGrid":
        x = np.exp(np.linspace(math.log(lo), math.log(hi), n))
        return cls(x, np.asarray(func(x), dtype=float))

    def log_value(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.interp(np.log(u), self._log_x, self._log_f, left=np.nan, right=np.nan)
        return out


def _log_phi(phi):
    """Uniform access: PhiGrid or positive callable -> vectorized log evaluator."""
    if isinstance(phi, PhiGrid):
        return phi.log_value

    def log_eval(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.log(np.asarray(phi(np.asarray(u, dtype=float)), dtype=float))
        return np.where(np.isfinite(vals), vals, np.nan)

    return log_eval


@dataclass(frozen=True)
class ResidualReport:
    max_rel: float
    mean_rel: float
    n_evaluated: int
    n_skipped: int
    grid_shape: tuple[int, int]


def feq_residual(
    phi_y,
    phi_l,
    alpha: float,
    beta: float,
    scales: ReferenceScales | None = None,
    *,
    span: float = 3.0,
    n_grid: int = 50,
) -> ResidualReport:
    """Relative residual of the invariant-function consistency equation.

    Both sides are ratios of the candidate functions evaluated at rescaled
    arguments; they are compared in log space on an n_grid x n_grid grid of
    (sales, labor) spanning +-span in natural logs around the reference
    point.  The relative residual at a point is
    |LHS-RHS|/max(|LHS|,|RHS|) = 1 - exp(-|log LHS - log RHS|).
    Grid points where any rescaled argument leaves a tabulated domain are
    skipped and counted; if all are skipped the domain is exhausted.
    """
    scales = scales or ReferenceScales()
    log_y = _log_phi(phi_y)
    log_l = _log_phi(phi_l)
    ys = scales.y0 * np.exp(np.linspace(-span, span, n_grid))
    ls = scales.l0 * np.exp(np.linspace(-span, span, n_grid))
    sales, labor = np.meshgrid(ys, ls, indexing="ij")

    fy = (labor / scales.l0) ** (-alpha)
    fl = (sales / scales.y0) ** (-beta)
    phi_l0 = log_l(np.array(scales.l0))
    phi_y0 = log_y(np.array(scales.y0))
    if not (np.isfinite(phi_l0) and np.isfinite(phi_y0)):
        raise DomainExhaustedError("reference point outside a supplied function domain")
    lhs = log_l(fl * labor) - log_l(fl * scales.l0) + float(phi_l0) - log_l(labor)
    rhs = log_y(fy * sales) - log_y(fy * scales.y0) + float(phi_y0) - log_y(sales)
    diff = np.abs(lhs - rhs)
    ok = np.isfinite(diff)
    n_skipped = int(diff.size - ok.sum())
    if not ok.any():
        raise DomainExhaustedError("every grid point fell outside the supplied function domains")
    rel = -np.expm1(-diff[ok])
    return ResidualReport(
        max_rel=float(rel.max()),
        mean_rel=float(rel.mean()),
        n_evaluated=int(ok.sum()),
        n_skipped=n_skipped,
        grid_shape=(n_grid, n_grid),
    )


def build_powerlaw_phi_l(phi_y, alpha: float, a: float, scales: ReferenceScales | None = None):
    """Labor-side invariant function induced by an arbitrary sales-side one
    when alpha*beta == 1: Phi_Y((L/L0)**(-alpha) * Y0) times (L/L0)**a."""
    scales = scales or ReferenceScales()

    def phi_l(labor):
        labor = np.asarray(labor, dtype=float)
        rel = labor / scales.l0
        return np.asarray(phi_y(rel ** (-alpha) * scales.y0), dtype=float) * rel**a

    return phi_l


def demo_smooth_phi_y(scales: ReferenceScales | None = None):
    """An arbitrary smooth positive function of ln(sales/Y0), deliberately not
    lognormal, for exercising the power-law-branch construction."""
    scales = scales or ReferenceScales()

    def phi_y(sales):
        x = np.log(np.asarray(sales, dtype=float) / scales.y0)
        return np.exp(-0.35 * x * x + 0.2 * x + 0.1 * np.sin(1.3 * x))

    return phi_y


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    lhs: float
    rhs: float
    error: float
    passed: bool


@dataclass
class IdentityLedger:
    tolerance: float
    checks: list[IdentityCheck] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, lhs: float, rhs: float) -> None:
        err = abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
        self.checks.append(IdentityCheck(name, float(lhs), float(rhs), err, err <= self.tolerance))


def identity_suite(params: DslParams, productivity=None, tol: float = 1e-10) -> IdentityLedger:
    """Check every closed-form identity of the lognormal branch at once.

    productivity overrides the derived productivity exponents, which lets a
    caller fault-inject a corrupted value and watch exactly one row fail.
    """
    require_lognormal(params)
    a, b, p = params.alpha, params.beta, params.p
    ab = a * b
    g = to_gaussian(params)
    pp = productivity if productivity is not None else derive_productivity(params)
    led = IdentityLedger(tolerance=tol)

    led.add("correlation = sqrt(alpha*beta)", g.correlation, math.sqrt(ab))
    led.add("var(y|l) = 1/(2*beta*p)", g.var_y_given_l, 1.0 / (2.0 * b * p))
    led.add("var(l|y) = 1/(2*alpha*p)", g.var_l_given_y, 1.0 / (2.0 * a * p))
    led.add("E(y|l) slope = alpha", g.slope_y_on_l, a)
    led.add("E(l|y) slope = beta", g.slope_l_on_y, b)

    quad_l, lin_l = g.marginal_log_coeffs("L")
    led.add("labor marginal quadratic = -alpha*(1-alpha*beta)*p", quad_l, -a * (1.0 - ab) * p)
    led.add("labor marginal linear = s+(q+1)*alpha", lin_l, params.s + (params.q + 1.0) * a)
    quad_y, lin_y = g.marginal_log_coeffs("Y")
    led.add("sales marginal quadratic = -beta*(1-alpha*beta)*p", quad_y, -b * (1.0 - ab) * p)
    led.add("sales marginal linear = q+(s+1)*beta", lin_y, params.q + (params.s + 1.0) * b)

    led.add("gamma1 = 1/(2*var(c))", pp.gamma1, 1.0 / (2.0 * g.var_c))
    led.add("beta_t = cov(l,c)/var(c)", pp.beta_t, g.slope_l_on_c)
    led.add("alpha_t*p_t = (alpha+beta-2*alpha*beta)*p", pp.alpha_t * pp.p_t, (a + b - 2.0 * ab) * p)
    led.add("var(l|c) = 1/(2*alpha_t*p_t)", g.var_l_given_c, 1.0 / (2.0 * pp.alpha_t * pp.p_t))
    led.add(
        "gamma1 = beta_t*(1-alpha_t*beta_t)*p_t",
        pp.gamma1,
        pp.beta_t * (1.0 - pp.alpha_t * pp.beta_t) * pp.p_t,
    )

    # the marginal quadratic coefficients must vanish linearly as alpha*beta -> 1;
    # normalize by the representable gap 1 - a*beta_k, not the nominal 10^-k,
    # so the ratio check is not limited by input rounding at tiny gaps
    for k in range(2, 7):
        beta_k = (1.0 - 10.0**-k) / a
        gap_k = 1.0 - a * beta_k
        g_k = to_gaussian(DslParams(a, beta_k, p, params.q, params.s))
        quad_k, _ = g_k.marginal_log_coeffs("L")
        led.add(f"marginal quadratic ~ (1-alpha*beta) at gap 1e-{k}", quad_k / gap_k, -a * p)
    return led


@dataclass(frozen=True)
class MomentCheck:
    name: str
    value: float
    target: float
    se: float
    passed: bool


@dataclass(frozen=True)
class McCrossReport:
    n: int
    seed: int
    checks: tuple[MomentCheck, ...]
    status: str  # "pass" | "fail" | "insufficient-precision"

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


#: Below this population size the 3-sigma tolerances say nothing useful and
#: the report flags precision instead of failing.
MC_MIN_CONCLUSIVE_N = 1_000


def mc_cross_check(
    params: DslParams, n: int = 1_000_000, seed: int = 0, scales: ReferenceScales | None = None
) -> McCrossReport:
    """Sample-moment comparison against the analytic Gaussian log model.

    Each check passes when the sampled value is within three standard errors
    of its analytic target; the productivity slope check regresses l on c.
    """
    scales = scales or ReferenceScales()
    require_lognormal(params)
    g = to_gaussian(params)
    pp = derive_productivity(params)
    table = sample_firms(SynthesisSpec(params=params, scales=scales, n=n, seed=seed))
    mom = sample_moments(table)
    rootn = math.sqrt(n)

    checks: list[MomentCheck] = []

    def add(name, value, target, se):
        checks.append(MomentCheck(name, float(value), float(target), float(se), abs(value - target) <= 3.0 * se))

    add("mean(l)", mom.mean_l, g.mu_l, math.sqrt(g.sig_ll) / rootn)
    add("mean(y)", mom.mean_y, g.mu_y, math.sqrt(g.sig_yy) / rootn)
    add("mean(c)", mom.mean_c, g.mu_c, math.sqrt(g.var_c) / rootn)
    add("var(l)", mom.cov[0, 0], g.sig_ll, g.sig_ll * math.sqrt(2.0 / (n - 1)))
    add("var(y)", mom.cov[1, 1], g.sig_yy, g.sig_yy * math.sqrt(2.0 / (n - 1)))
    add(
        "cov(l,y)",
        mom.cov[0, 1],
        g.sig_ly,
        math.sqrt((g.sig_ll * g.sig_yy + g.sig_ly**2) / (n - 1)),
    )
    rho = g.correlation
    add(
        "corr(l,y)",
        mom.cov[0, 1] / math.sqrt(mom.cov[0, 0] * mom.cov[1, 1]),
        rho,
        (1.0 - rho * rho) / rootn,
    )
    slope_fit = linear_fit(table.c, table.l)
    add("E(l|c) slope", slope_fit.slope, pp.beta_t, max(slope_fit.slope_se, 1e-300))

    if n < MC_MIN_CONCLUSIVE_N:
        status = "insufficient-precision"
    else:
        status = "pass" if all(c.passed for c in checks) else "fail"
    return McCrossReport(n=n, seed=seed, checks=tuple(checks), status=status)
