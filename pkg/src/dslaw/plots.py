"""Figure rendering for the CLI report path.

Each function draws one figure from the same in-memory series that go into
the CSV files and saves it as a PNG next to them.  Axes are log10 of the
raw variables throughout.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def _new_ax(xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig, ax


def _save(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def scatter_with_kernel(
    path: str,
    scatter_x: np.ndarray,
    scatter_y: np.ndarray,
    grid: np.ndarray,
    est: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    line: tuple[float, float, tuple[float, float]] | None,
    xlabel: str,
    ylabel: str,
    line_label: str = "linear fit",
) -> None:
    """Scatter cloud, kernel mean with 95% band, optional straight line.

    line is (slope, intercept, (x_lo, x_hi)) in the plotted log10 units.
    """
    fig, ax = _new_ax(xlabel, ylabel)
    ax.plot(scatter_x, scatter_y, ".", color="0.7", ms=2, rasterized=True, zorder=1)
    ax.fill_between(grid, lo, hi, color="C0", alpha=0.3, lw=0, zorder=2)
    ax.plot(grid, est, color="C0", lw=1.5, label="kernel mean", zorder=3)
    if line is not None:
        slope, intercept, (x0, x1) = line
        xs = np.array([x0, x1])
        ax.plot(xs, slope * xs + intercept, "k-", lw=2.0, label=line_label, zorder=4)
    ax.legend(loc="best", fontsize=8)
    _save(fig, path)


def conditional_densities(path: str, curves, xlabel: str) -> None:
    """One density curve per conditioning bin; curves is [(label, x, f), ...]."""
    fig, ax = _new_ax(xlabel, "density per decade")
    for label, x, f in curves:
        ax.plot(x, f, lw=1.0, label=label)
    ax.set_yscale("log")
    ax.legend(loc="best", fontsize=7)
    _save(fig, path)


def collapse_with_fit(
    path: str,
    hist_x: np.ndarray,
    hist_f: np.ndarray,
    fit_x: np.ndarray,
    fit_f: np.ndarray,
    xlabel: str,
    fit_label: str = "lognormal fit",
) -> None:
    """Pooled collapsed histogram (dots) against its fitted curve."""
    fig, ax = _new_ax(xlabel, "density per decade")
    ax.plot(hist_x, hist_f, "o", ms=3, color="0.3", label="collapsed data")
    ax.plot(fit_x, fit_f, "-", color="C3", lw=1.5, label=fit_label)
    ax.set_yscale("log")
    positive = hist_f[hist_f > 0]
    if positive.size:
        ax.set_ylim(bottom=max(positive.min() * 0.5, 1e-12))
    ax.legend(loc="best", fontsize=8)
    _save(fig, path)
