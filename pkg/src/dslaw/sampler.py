"""Seeded synthesis of firm populations from the lognormal joint density.

Sampling draws (l, y) pairs through the explicit 2x2 triangular factor of
the log-coordinate covariance applied to standard normal deviates from
numpy's default generator, so a given (seed, spec) always reproduces the
same table bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyTableError
from .model import DslParams, ReferenceScales, require_lognormal, to_gaussian
from .table import FirmTable


@dataclass(frozen=True)
class SynthesisSpec:
    params: DslParams
    scales: ReferenceScales = field(default_factory=ReferenceScales)
    n: int = 100_000
    seed: int = 42
    round_labor: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"population size must be >= 1, got {self.n}")


def sample_firms(spec: SynthesisSpec) -> FirmTable:
    """Draw spec.n firms i.i.d. from the joint density of spec.params.

    With round_labor=True, labor is rounded to the nearest integer with a
    floor of one worker.
    """
    require_lognormal(spec.params)
    g = to_gaussian(spec.params)
    a, b, c = g.cholesky()
    rng = np.random.default_rng(spec.seed)
    z = rng.standard_normal((2, spec.n))
    l = g.mu_l + a * z[0]
    y = g.mu_y + b * z[0] + c * z[1]
    sales = spec.scales.y0 * np.exp(y)
    labor = spec.scales.l0 * np.exp(l)
    if spec.round_labor:
        labor = np.maximum(np.rint(labor), 1.0)
    return FirmTable(np.arange(1, spec.n + 1, dtype=np.int64), sales, labor, spec.scales)


@dataclass(frozen=True)
class SampleMoments:
    mean_l: float
    mean_y: float
    cov: np.ndarray  # 2x2 covariance of (l, y), unbiased

    @property
    def mean_c(self) -> float:
        return self.mean_y - self.mean_l


def sample_moments(table: FirmTable) -> SampleMoments:
    """Unbiased sample mean and covariance of (l, y); needs n >= 2."""
    if table.n < 2:
        raise EmptyTableError(f"need at least 2 records for a covariance, got {table.n}")
    cov = np.cov(np.vstack([table.l, table.y]), ddof=1)
    return SampleMoments(float(table.l.mean()), float(table.y.mean()), cov)
