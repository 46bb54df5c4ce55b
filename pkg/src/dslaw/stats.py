"""Small numeric building blocks: OLS, weighted quadratic fits, kernel means,
bootstrap weights, and the two-sample Kolmogorov-Smirnov distance."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erf

from .errors import DegenerateXError


def norm_cdf(x):
    return 0.5 * (1.0 + erf(np.asarray(x, dtype=float) / math.sqrt(2.0)))


def r2_pearson(fitted: np.ndarray, observed: np.ndarray) -> float:
    """Squared Pearson correlation, with degenerate inputs mapped to 1 or 0."""
    df = fitted - fitted.mean()
    do = observed - observed.mean()
    denom = (df @ df) * (do @ do)
    if denom <= 0:
        return 1.0 if np.allclose(fitted, observed) else 0.0
    return float((df @ do) ** 2 / denom)


def central_range(x: np.ndarray, lo_q: float = 0.10, hi_q: float = 0.90) -> tuple[float, float]:
    return float(np.quantile(x, lo_q)), float(np.quantile(x, hi_q))


def ols_line(x: np.ndarray, y: np.ndarray):
    """Ordinary least squares line fit.

    Returns (slope, intercept, slope_se, intercept_se, r2) with the classical
    standard errors (residual dof n-2).
    """
    n = x.size
    xm = float(x.mean())
    ym = float(y.mean())
    dx = x - xm
    dy = y - ym
    sxx = float(dx @ dx)
    if sxx <= 0:
        raise DegenerateXError("zero variance in the conditioning variable")
    sxy = float(dx @ dy)
    slope = sxy / sxx
    intercept = ym - slope * xm
    resid = dy - slope * dx
    rss = float(resid @ resid)
    syy = float(dy @ dy)
    s2 = rss / (n - 2) if n > 2 else 0.0
    slope_se = math.sqrt(s2 / sxx)
    intercept_se = math.sqrt(s2 * (1.0 / n + xm * xm / sxx))
    r2 = 1.0 if syy <= 0 else sxy * sxy / (sxx * syy)
    return slope, intercept, slope_se, intercept_se, r2


def wls_quadratic(x: np.ndarray, z: np.ndarray, w: np.ndarray):
    """Weighted least squares of z on (x^2, x, 1).

    Weights are inverse variances up to a common factor; the coefficient
    covariance is (X'WX)^-1 scaled by the weighted residual variance.
    Returns (coeffs, ses) ordered (quadratic, linear, constant).
    """
    X = np.column_stack([x * x, x, np.ones_like(x)])
    xtwx = X.T @ (w[:, None] * X)
    xtwz = X.T @ (w * z)
    coef = np.linalg.solve(xtwx, xtwz)
    resid = z - X @ coef
    dof = x.size - 3
    s2 = float(w @ (resid * resid)) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.inv(xtwx)
    return coef, np.sqrt(np.maximum(np.diag(cov), 0.0))


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov distance (max ECDF gap)."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    both = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, both, side="right") / a.size
    cdf_b = np.searchsorted(b, both, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


def multinomial_weights(n: int, reps: int, rng: np.random.Generator, chunk: int = 50) -> np.ndarray:
    """Resampling-with-replacement count matrix of shape (n, reps), float32.

    Column j holds how often each of the n observations appears in bootstrap
    replicate j.  Counts are generated in replicate chunks to bound memory.
    """
    out = np.empty((n, reps), dtype=np.float32)
    chunk = max(1, min(chunk, (1 << 31) // max(n, 1)))  # keep int32 offsets safe
    for j0 in range(0, reps, chunk):
        m = min(chunk, reps - j0)
        idx = rng.integers(0, n, size=(m, n), dtype=np.int32)
        idx += (np.arange(m, dtype=np.int32) * n)[:, None]
        counts = np.bincount(idx.ravel(), minlength=m * n).reshape(m, n)
        out[:, j0 : j0 + m] = counts.T
    return out


def nadaraya_watson(
    x: np.ndarray,
    y: np.ndarray,
    grid: np.ndarray,
    bandwidth: float,
    boot_weights: np.ndarray | None = None,
    chunk_cells: int = 4_000_000,
):
    """Gaussian-kernel locally weighted mean of y at the grid points.

    Returns (estimate, boot) where boot has one smoothed curve per column of
    boot_weights (or None).  Grid cells with no effective mass come back NaN.
    """
    x = np.ascontiguousarray(x, dtype=float)
    yf = np.ascontiguousarray(y, dtype=float)
    est = np.empty(grid.size)
    boot = None
    wy32 = None
    if boot_weights is not None:
        boot = np.empty((boot_weights.shape[1], grid.size), dtype=np.float32)
        wy32 = boot_weights * yf.astype(np.float32)[:, None]
    rows = max(1, chunk_cells // max(x.size, 1))
    for i0 in range(0, grid.size, rows):
        gg = grid[i0 : i0 + rows, None]
        kern = np.exp(-0.5 * ((gg - x[None, :]) / bandwidth) ** 2)
        den = kern.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            est[i0 : i0 + rows] = np.where(den > 0, kern @ yf / den, np.nan)
        if boot_weights is not None:
            k32 = kern.astype(np.float32)
            bden = k32 @ boot_weights
            with np.errstate(invalid="ignore", divide="ignore"):
                boot[:, i0 : i0 + rows] = np.where(bden > 0, (k32 @ wy32) / bden, np.nan).T
    return est, boot
