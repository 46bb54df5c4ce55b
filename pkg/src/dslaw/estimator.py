"""Estimation pipeline: recovers the scaling exponents from a firm table.

Mirrors the empirical procedure the density family was built to describe:
kernel regression of the conditional means, range-restricted linear fits,
log-binned conditional histograms, a scaling collapse checked with pairwise
two-sample KS distances, and quadratic fits to the pooled collapsed density
(with a Gaussian-MLE cross-check) that recover the curvature scale p.

All operations are read-only over the table and deterministic given the
configuration, including its bootstrap seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DataError,
    DegenerateXError,
    InsufficientDataError,
    NegativeCurvatureError,
    NoBinsSurviveError,
)
from .stats import (
    central_range,
    ks_two_sample,
    multinomial_weights,
    nadaraya_watson,
    ols_line,
    r2_pearson,
    wls_quadratic,
)
from .table import FirmTable, ingest_csv  # noqa: F401  (ingest_csv is part of this module's API)

#: Empirical fit windows of the data the family was derived from, in
#: log10 of raw labor and sales.  Useful as explicit --l-range/--y-range
#: values; the pipeline's own default is the central-80% quantile window.
PAPER_L_RANGE_LOG10 = (0.7, 2.5)
PAPER_Y_RANGE_LOG10 = (4.5, 7.0)

_MIN_KERNEL_PAIRS = 30
_MIN_TABLE = 1_000


@dataclass(frozen=True)
class KernelFit:
    """Kernel conditional-mean curve with a bootstrap percentile band."""

    grid: np.ndarray
    estimate: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    bandwidth: float
    r2: float


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    slope_se: float
    intercept_se: float
    r2: float
    fit_range: tuple[float, float]
    n_used: int


@dataclass(frozen=True)
class ConditionalHistogram:
    """Normalized density of the response log variable inside one conditioning bin."""

    axis: str
    cond_low: float
    cond_high: float
    cond_center: float
    edges: np.ndarray
    density: np.ndarray
    count: int


@dataclass(frozen=True)
class CollapseResult:
    """Per-bin responses shifted by the scaling exponent, plus KS diagnostics."""

    axis: str
    exponent: float
    bin_centers: np.ndarray
    samples: list[np.ndarray]
    ks_matrix: np.ndarray
    pooled: np.ndarray
    n_dropped_bins: int

    @property
    def max_ks(self) -> float:
        return float(self.ks_matrix.max()) if self.ks_matrix.size else 0.0


@dataclass(frozen=True)
class PhiFit:
    """Quadratic-in-log fit of a pooled collapsed density."""

    method: str  # "quadratic-log-density" | "gaussian-mle"
    curvature: float
    curvature_se: float
    tilt_hat: float
    tilt_se: float
    p_hat: float | None
    p_se: float | None
    log_density_coeffs: tuple[float, float, float]
    n_pooled: int


@dataclass(frozen=True)
class BinSpec:
    """How to slice the conditioning variable and bin the response."""

    n_bins: int = 10
    cond_range: tuple[float, float] | None = None  # None -> central 80% quantiles
    response_bins: int = 40
    min_count: int = 50


@dataclass(frozen=True)
class EstimateConfig:
    """Tuning knobs of estimate_all; ranges are in the internal log units."""

    l_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    n_condition_bins: int = 12
    response_bins: int = 60
    min_bin_count: int = 50
    min_pooled: int = 500
    bandwidth: float | None = None
    grid_size: int = 64
    bootstrap_reps: int = 200
    bootstrap_seed: int = 7


@dataclass(frozen=True)
class EstimateResult:
    alpha: RegressionFit
    beta: RegressionFit
    kernel_y_on_l: KernelFit
    kernel_l_on_y: KernelFit
    conditionals: list[ConditionalHistogram]
    collapse_y: CollapseResult
    collapse_l: CollapseResult
    phi_y: PhiFit
    phi_y_mle: PhiFit
    phi_l: PhiFit
    phi_l_mle: PhiFit
    p_combined: float
    p_combined_se: float
    config: EstimateConfig


@dataclass(frozen=True)
class ProductivityResult:
    beta_t: RegressionFit
    kernel_l_on_c: KernelFit
    gamma1: float
    gamma1_se: float
    var_c: float
    collapse_c: CollapseResult
    psi: PhiFit | None
    psi_mle: PhiFit | None
    warnings: tuple[str, ...] = ()


def kernel_regression(
    x,
    y,
    grid=None,
    bandwidth: float | None = None,
    *,
    n_grid: int = 64,
    n_boot: int = 200,
    seed: int = 7,
    r2_range: tuple[float, float] | None = None,
    boot_weights: np.ndarray | None = None,
) -> KernelFit:
    """Gaussian-kernel conditional mean with a 95% bootstrap band.

    The default bandwidth is the normal-reference rule 1.06*sd(x)*n**(-1/5);
    the band is the 2.5/97.5 percentile of n_boot multinomial resamples
    (clipped to bracket the point estimate).  r2 is the squared Pearson
    correlation between the curve interpolated at the data points and the
    observations, restricted to r2_range when given.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size:
        raise ValueError("x and y must be paired")
    if x.size < _MIN_KERNEL_PAIRS:
        raise InsufficientDataError(f"kernel regression needs >= {_MIN_KERNEL_PAIRS} pairs, got {x.size}")
    sd = float(x.std(ddof=1))
    if sd == 0.0:
        raise DegenerateXError("zero variance in the conditioning variable")
    if bandwidth is not None and not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    h = bandwidth if bandwidth is not None else 1.06 * sd * x.size ** (-0.2)
    if grid is None:
        grid = np.linspace(float(x.min()), float(x.max()), n_grid)
    else:
        grid = np.asarray(grid, dtype=float)
    if boot_weights is None:
        boot_weights = multinomial_weights(x.size, n_boot, np.random.default_rng(seed))
    est, boot = nadaraya_watson(x, y, grid, h, boot_weights)
    lo, hi = np.nanpercentile(boot.astype(float), [2.5, 97.5], axis=0)
    lo = np.minimum(lo, est)
    hi = np.maximum(hi, est)
    fitted = np.interp(x, grid, est)
    mask = np.isfinite(fitted)
    if r2_range is not None:
        mask &= (x >= r2_range[0]) & (x <= r2_range[1])
    r2 = r2_pearson(fitted[mask], y[mask]) if mask.any() else float("nan")
    return KernelFit(grid=grid, estimate=est, ci_low=lo, ci_high=hi, bandwidth=h, r2=r2)


def linear_fit(x, y, fit_range: tuple[float, float] | None = None) -> RegressionFit:
    """OLS of y on x over the closed interval fit_range of x (default: all)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if fit_range is None:
        lo, hi = float(x.min()), float(x.max())
    else:
        lo, hi = float(fit_range[0]), float(fit_range[1])
    mask = (x >= lo) & (x <= hi)
    n_used = int(mask.sum())
    if n_used < 3:
        raise InsufficientDataError(f"need >= 3 pairs inside the fit range, got {n_used}")
    slope, intercept, slope_se, intercept_se, r2 = ols_line(x[mask], y[mask])
    return RegressionFit(slope, intercept, slope_se, intercept_se, r2, (lo, hi), n_used)


def _axis_arrays(table: FirmTable, axis: str) -> tuple[np.ndarray, np.ndarray]:
    if axis == "L":
        return table.l, table.y
    if axis == "Y":
        return table.y, table.l
    if axis == "C":
        return table.c, table.l
    raise ValueError(f"axis must be 'L', 'Y' or 'C', got {axis!r}")


def _condition_bins(cond: np.ndarray, spec: BinSpec):
    """Equal-width bins of the conditioning log variable; returns kept bins."""
    lo, hi = spec.cond_range if spec.cond_range is not None else central_range(cond)
    if not hi > lo:
        raise DegenerateXError("conditioning range is empty")
    edges = np.linspace(lo, hi, spec.n_bins + 1)
    idx = np.digitize(cond, edges) - 1
    kept = []
    dropped = 0
    for b in range(spec.n_bins):
        members = np.flatnonzero(idx == b)
        if members.size >= spec.min_count:
            kept.append((0.5 * (edges[b] + edges[b + 1]), edges[b], edges[b + 1], members))
        else:
            dropped += 1
    if not kept:
        raise NoBinsSurviveError(
            f"no conditioning bin reached {spec.min_count} samples over [{lo:.3g}, {hi:.3g}]"
        )
    return kept, dropped


def conditional_histograms(table: FirmTable, axis: str = "L", spec: BinSpec = BinSpec()) -> list[ConditionalHistogram]:
    """Normalized per-bin densities of the response log variable.

    Each histogram integrates to one against its own log-bin widths; bins of
    the conditioning variable with fewer than spec.min_count samples are
    dropped.
    """
    cond, resp = _axis_arrays(table, axis)
    kept, _ = _condition_bins(cond, spec)
    out = []
    for center, lo, hi, members in kept:
        values = resp[members]
        edges = np.linspace(float(values.min()), float(values.max()), spec.response_bins + 1)
        if edges[0] == edges[-1]:
            edges = edges + np.linspace(0.0, 1e-9, spec.response_bins + 1)
        counts, edges = np.histogram(values, bins=edges)
        widths = np.diff(edges)
        density = counts / (values.size * widths)
        out.append(
            ConditionalHistogram(
                axis=axis,
                cond_low=float(lo),
                cond_high=float(hi),
                cond_center=float(center),
                edges=edges,
                density=density,
                count=int(values.size),
            )
        )
    return out


def scaling_collapse(table: FirmTable, exponent: float, axis: str = "L", spec: BinSpec = BinSpec()) -> CollapseResult:
    """Shift each bin's responses by exponent*bin_center and compare the bins.

    Under the correct exponent the shifted samples of every conditioning bin
    come from the same invariant density, so all pairwise two-sample KS
    distances are small.
    """
    cond, resp = _axis_arrays(table, axis)
    kept, dropped = _condition_bins(cond, spec)
    centers = np.array([k[0] for k in kept])
    samples = [np.sort(resp[k[3]] - exponent * k[0]) for k in kept]
    k = len(samples)
    ks = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            ks[i, j] = ks[j, i] = ks_two_sample(samples[i], samples[j])
    pooled = np.concatenate(samples)
    return CollapseResult(
        axis=axis,
        exponent=float(exponent),
        bin_centers=centers,
        samples=samples,
        ks_matrix=ks,
        pooled=pooled,
        n_dropped_bins=dropped,
    )


def _gaussian_mle_fit(pooled: np.ndarray, conjugate_slope: float | None) -> PhiFit:
    m = float(pooled.mean())
    v = float(pooled.var(ddof=1))
    n = pooled.size
    curv = -0.5 / v
    curv_se = abs(curv) * math.sqrt(2.0 / (n - 1))
    tilt = m / v - 1.0
    tilt_se = math.sqrt(1.0 / (n * v) + 2.0 * m * m / (v * v * (n - 1)))
    p_hat = p_se = None
    if conjugate_slope is not None and conjugate_slope != 0:
        p_hat = 1.0 / (2.0 * conjugate_slope * v)
        p_se = abs(p_hat) * math.sqrt(2.0 / (n - 1))
    c0 = -0.5 * m * m / v - 0.5 * math.log(2.0 * math.pi * v)
    return PhiFit(
        method="gaussian-mle",
        curvature=curv,
        curvature_se=curv_se,
        tilt_hat=tilt,
        tilt_se=tilt_se,
        p_hat=p_hat,
        p_se=p_se,
        log_density_coeffs=(curv, m / v, c0),
        n_pooled=n,
    )


def fit_phi(
    collapse: CollapseResult,
    which: str,
    conjugate_slope: float | None = None,
    *,
    min_pooled: int = 500,
    n_bins: int = 60,
) -> tuple[PhiFit, PhiFit]:
    """Fit the invariant function's log density from a pooled collapse.

    Primary route: weighted least squares of a quadratic in the log variable
    to the log histogram density, weights equal to bin counts; the curvature
    maps to p through the conjugate slope (beta for the sales function Phi_Y,
    alpha for the labor function Phi_L).  Cross-check route: Gaussian maximum
    likelihood on the pooled sample, p = 1/(2*slope*variance).

    The reported tilt is the linear coefficient of the raw-variable density
    form, i.e. the fitted linear term minus the log-variable Jacobian shift
    of one.
    """
    if which not in ("Y", "L", "psi"):
        raise ValueError(f"which must be 'Y', 'L' or 'psi', got {which!r}")
    pooled = collapse.pooled
    if pooled.size < min_pooled:
        raise InsufficientDataError(f"pooled collapse has {pooled.size} < {min_pooled} samples")
    lo, hi = np.quantile(pooled, [0.005, 0.995])
    edges = np.linspace(lo, hi, n_bins + 1)
    counts, edges = np.histogram(pooled, bins=edges)
    widths = np.diff(edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    keep = counts > 0
    if keep.sum() < 5:
        raise InsufficientDataError("fewer than 5 occupied bins in the pooled histogram")
    total = int(counts.sum())
    logf = np.log(counts[keep] / (total * widths[keep]))
    coef, ses = wls_quadratic(centers[keep], logf, counts[keep].astype(float))
    curv = float(coef[0])
    if curv >= 0:
        raise NegativeCurvatureError(
            f"pooled log density has curvature {curv:.4g} >= 0; not lognormal-like"
        )
    p_hat = p_se = None
    if conjugate_slope is not None and conjugate_slope != 0:
        p_hat = -curv / conjugate_slope
        p_se = float(ses[0]) / abs(conjugate_slope)
    wls = PhiFit(
        method="quadratic-log-density",
        curvature=curv,
        curvature_se=float(ses[0]),
        tilt_hat=float(coef[1]) - 1.0,
        tilt_se=float(ses[1]),
        p_hat=p_hat,
        p_se=p_se,
        log_density_coeffs=(float(coef[0]), float(coef[1]), float(coef[2])),
        n_pooled=pooled.size,
    )
    return wls, _gaussian_mle_fit(pooled, conjugate_slope)


def _require_table(table: FirmTable) -> None:
    if table.n < _MIN_TABLE:
        raise InsufficientDataError(f"pipeline needs >= {_MIN_TABLE} records, got {table.n}")


def estimate_all(table: FirmTable, config: EstimateConfig = EstimateConfig()) -> EstimateResult:
    """Full exponent recovery on one table.

    Runs both conditional-mean orientations (kernel + range-restricted OLS),
    the conditional histograms, both scaling collapses, the quadratic and
    MLE fits of both invariant functions, and combines the two p estimates
    with equal weights.  Deterministic given (table, config).
    """
    _require_table(table)
    l, y = table.l, table.y
    l_rng = config.l_range if config.l_range is not None else central_range(l)
    y_rng = config.y_range if config.y_range is not None else central_range(y)

    weights = multinomial_weights(
        table.n, config.bootstrap_reps, np.random.default_rng(config.bootstrap_seed)
    )
    kernel_y_on_l = kernel_regression(
        l, y, bandwidth=config.bandwidth, n_grid=config.grid_size,
        r2_range=l_rng, boot_weights=weights,
    )
    kernel_l_on_y = kernel_regression(
        y, l, bandwidth=config.bandwidth, n_grid=config.grid_size,
        r2_range=y_rng, boot_weights=weights,
    )
    alpha_fit = linear_fit(l, y, l_rng)
    beta_fit = linear_fit(y, l, y_rng)

    spec_l = BinSpec(config.n_condition_bins, l_rng, config.response_bins, config.min_bin_count)
    spec_y = BinSpec(config.n_condition_bins, y_rng, config.response_bins, config.min_bin_count)
    conditionals = conditional_histograms(table, "L", spec_l)
    collapse_y = scaling_collapse(table, alpha_fit.slope, "L", spec_l)
    collapse_l = scaling_collapse(table, beta_fit.slope, "Y", spec_y)
    phi_y, phi_y_mle = fit_phi(
        collapse_y, "Y", beta_fit.slope, min_pooled=config.min_pooled, n_bins=config.response_bins
    )
    phi_l, phi_l_mle = fit_phi(
        collapse_l, "L", alpha_fit.slope, min_pooled=config.min_pooled, n_bins=config.response_bins
    )
    if phi_y.p_hat is None or phi_l.p_hat is None:
        p_combined = p_combined_se = float("nan")
    else:
        p_combined = 0.5 * (phi_y.p_hat + phi_l.p_hat)
        p_combined_se = 0.5 * math.hypot(phi_y.p_se, phi_l.p_se)
    return EstimateResult(
        alpha=alpha_fit,
        beta=beta_fit,
        kernel_y_on_l=kernel_y_on_l,
        kernel_l_on_y=kernel_l_on_y,
        conditionals=conditionals,
        collapse_y=collapse_y,
        collapse_l=collapse_l,
        phi_y=phi_y,
        phi_y_mle=phi_y_mle,
        phi_l=phi_l,
        phi_l_mle=phi_l_mle,
        p_combined=p_combined,
        p_combined_se=p_combined_se,
        config=config,
    )


def estimate_productivity(
    table: FirmTable,
    config: EstimateConfig = EstimateConfig(),
    alpha_hat: float | None = None,
) -> ProductivityResult:
    """Productivity-side estimates: slope of E(l|c), curvature of c, collapse.

    The linear fit of l on c uses the full data range by default (the
    conditional mean is linear everywhere under the lognormal family, and
    the slope is small, so range restriction only costs precision).  The
    Gaussian curvature estimate is gamma1 = 1/(2*var(c)).  When alpha_hat is
    given, the collapsed density fit also reports the implied curvature
    scale via the conjugate slope alpha_hat - 1.
    """
    _require_table(table)
    c, l = table.c, table.l
    warnings: list[str] = []
    if float(l.var(ddof=1)) == 0.0:
        warnings.append("labor is constant; the conditional-mean slope is trivially 0")
    weights = multinomial_weights(
        table.n, config.bootstrap_reps, np.random.default_rng(config.bootstrap_seed)
    )
    kernel = kernel_regression(
        c, l, bandwidth=config.bandwidth, n_grid=config.grid_size, boot_weights=weights
    )
    fit = linear_fit(c, l, None)
    var_c = float(c.var(ddof=1))
    gamma1 = 1.0 / (2.0 * var_c)
    gamma1_se = gamma1 * math.sqrt(2.0 / (table.n - 1))
    spec_c = BinSpec(config.n_condition_bins, None, config.response_bins, config.min_bin_count)
    collapse_c = scaling_collapse(table, fit.slope, "C", spec_c)
    conj = None if alpha_hat is None else alpha_hat - 1.0
    try:
        psi, psi_mle = fit_phi(
            collapse_c, "psi", conj, min_pooled=config.min_pooled, n_bins=config.response_bins
        )
    except (DataError, np.linalg.LinAlgError) as exc:
        psi = psi_mle = None
        warnings.append(f"collapsed-density fit unavailable: {exc}")
    return ProductivityResult(
        beta_t=fit,
        kernel_l_on_c=kernel,
        gamma1=gamma1,
        gamma1_se=gamma1_se,
        var_c=var_c,
        collapse_c=collapse_c,
        psi=psi,
        psi_mle=psi_mle,
        warnings=tuple(warnings),
    )
