"""Scaling-law toolkit for firm sales/labor data.

A closed-form lognormal/power-law density family for (sales, labor) pairs,
a seeded synthetic-population generator, an estimation pipeline recovering
the scaling exponents from data, and a numerical verifier for the identity
web the family satisfies.
"""

from .densities import (
    conditional_pdf_L_given_C,
    conditional_pdf_L_given_Y,
    conditional_pdf_Y_given_L,
    expected_L_given_C,
    expected_L_given_C_slope,
    joint_pdf,
    log_joint_density,
    marginal_pdf_C,
    marginal_pdf_L,
    marginal_pdf_Y,
    productivity_joint_pdf,
    psi_L,
    scaling_function_L,
    scaling_function_Y,
)
from .errors import (
    AllRowsRejectedError,
    ConfigError,
    DataError,
    DegenerateXError,
    DomainError,
    DomainExhaustedError,
    DslError,
    EmptySourceError,
    EmptyTableError,
    InsufficientDataError,
    MalformedHeaderError,
    NegativeCurvatureError,
    NoBinsSurviveError,
    NonNormalizableError,
    SingularProductivityError,
)
from .estimator import (
    BinSpec,
    CollapseResult,
    ConditionalHistogram,
    EstimateConfig,
    EstimateResult,
    KernelFit,
    PhiFit,
    ProductivityResult,
    RegressionFit,
    conditional_histograms,
    estimate_all,
    estimate_productivity,
    fit_phi,
    kernel_regression,
    linear_fit,
    scaling_collapse,
)
from .model import (
    Branch,
    DslParams,
    GaussianLogModel,
    PowerLawParams,
    ProductivityParams,
    ReferenceScales,
    derive_productivity,
    powerlaw_relations,
    to_gaussian,
    validate_params,
)
from .sampler import SampleMoments, SynthesisSpec, sample_firms, sample_moments
from .table import FirmTable, ingest_csv
from .verify import (
    IdentityLedger,
    McCrossReport,
    PhiGrid,
    ResidualReport,
    build_powerlaw_phi_l,
    feq_residual,
    identity_suite,
    mc_cross_check,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "Branch",
    "DslParams",
    "GaussianLogModel",
    "PowerLawParams",
    "ProductivityParams",
    "ReferenceScales",
    "derive_productivity",
    "powerlaw_relations",
    "to_gaussian",
    "validate_params",
    # densities
    "conditional_pdf_L_given_C",
    "conditional_pdf_L_given_Y",
    "conditional_pdf_Y_given_L",
    "expected_L_given_C",
    "expected_L_given_C_slope",
    "joint_pdf",
    "log_joint_density",
    "marginal_pdf_C",
    "marginal_pdf_L",
    "marginal_pdf_Y",
    "productivity_joint_pdf",
    "psi_L",
    "scaling_function_L",
    "scaling_function_Y",
    # table / sampler
    "FirmTable",
    "ingest_csv",
    "SampleMoments",
    "SynthesisSpec",
    "sample_firms",
    "sample_moments",
    # estimator
    "BinSpec",
    "CollapseResult",
    "ConditionalHistogram",
    "EstimateConfig",
    "EstimateResult",
    "KernelFit",
    "PhiFit",
    "ProductivityResult",
    "RegressionFit",
    "conditional_histograms",
    "estimate_all",
    "estimate_productivity",
    "fit_phi",
    "kernel_regression",
    "linear_fit",
    "scaling_collapse",
    # verify
    "IdentityLedger",
    "McCrossReport",
    "PhiGrid",
    "ResidualReport",
    "build_powerlaw_phi_l",
    "feq_residual",
    "identity_suite",
    "mc_cross_check",
    # errors
    "DslError",
    "ConfigError",
    "NonNormalizableError",
    "SingularProductivityError",
    "DomainError",
    "DataError",
    "MalformedHeaderError",
    "EmptySourceError",
    "AllRowsRejectedError",
    "EmptyTableError",
    "InsufficientDataError",
    "DegenerateXError",
    "NoBinsSurviveError",
    "NegativeCurvatureError",
    "DomainExhaustedError",
]
