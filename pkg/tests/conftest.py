import numpy as np
import pytest

from dslaw import (
    DslParams,
    EstimateConfig,
    ReferenceScales,
    SynthesisSpec,
    estimate_all,
    sample_firms,
)

# headline parameter set used throughout: the empirical values the family
# was fitted to (alpha, beta, combined p)
PAPER = DslParams(alpha=1.037, beta=0.655, p=0.698)


@pytest.fixture(scope="session")
def paper_params() -> DslParams:
    return PAPER


@pytest.fixture(scope="session")
def scales() -> ReferenceScales:
    return ReferenceScales()


@pytest.fixture(scope="session")
def paper_table(scales):
    """One n=1e5 synthetic population at the headline parameters."""
    return sample_firms(SynthesisSpec(params=PAPER, scales=scales, n=100_000, seed=42))


@pytest.fixture(scope="session")
def paper_estimate(paper_table):
    """estimate_all on the shared table, reused by several test modules."""
    return estimate_all(paper_table, EstimateConfig())


def trapezoid_2d(f: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """Independent quadrature oracle: iterated trapezoid rule."""
    return float(np.trapezoid(np.trapezoid(f, y, axis=1), x))
