"""Command-line front end: generate / estimate / productivity / verify / reproduce.

Every subcommand reads an optional JSON config (--config), applies explicit
flags on top, writes a report.json plus plot-ready series CSVs into --out,
and renders PNG figures alongside them unless --no-plots is given.  Series
axes are log10 of the raw variables; densities are per decade.

Exit codes: 0 success, 2 config error, 3 data error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .densities import scaling_function_L, scaling_function_Y
from .errors import (
    ConfigError,
    DataError,
    DomainError,
    DomainExhaustedError,
    DslError,
    NonNormalizableError,
    SingularProductivityError,
)
from .estimator import (
    EstimateConfig,
    EstimateResult,
    KernelFit,
    PhiFit,
    ProductivityResult,
    RegressionFit,
    estimate_all,
    estimate_productivity,
    ingest_csv,
)
from .model import (
    Branch,
    DslParams,
    ReferenceScales,
    derive_productivity,
    powerlaw_relations,
    validate_params,
)
from .report import RunReport
from .sampler import SynthesisSpec, sample_firms
from .table import FirmTable
from .verify import (
    PhiGrid,
    build_powerlaw_phi_l,
    feq_residual,
    identity_suite,
)

LN10 = math.log(10.0)

#: reproduce-mode tolerances on the recovered values (documented contract)
REPRODUCE_TOL = {
    "alpha": 0.02,
    "beta": 0.02,
    "p_combined": 0.05,
    "beta_t": 0.01,
    "gamma1": 0.02,
}


@dataclass
class RunConfig:
    seed: int = 42
    n: int = 100_000
    alpha: float = 1.037
    beta: float = 0.655
    p: float = 0.698
    q: float = 0.0
    s: float = 0.0
    y0: float = 10**5.5
    l0: float = 10**1.5
    l_range: tuple[float, float] | None = None  # log10 of raw labor
    y_range: tuple[float, float] | None = None  # log10 of raw sales
    bins: int = 12
    bandwidth: float | None = None
    bootstrap: int = 200
    bootstrap_seed: int = 7
    round_labor: bool = False
    input: str | None = None
    out: str = "out"
    plots: bool = True
    scatter_max: int = 2000
    mu_l: float | None = None
    mu_y: float | None = None
    phi_y_grid: str | None = None
    phi_l_grid: str | None = None
    feq_tol: float = 1e-8
    identity_tol: float = 1e-10
    feq_span: float = 3.0
    feq_grid_n: int = 50

    def scales(self) -> ReferenceScales:
        return ReferenceScales(y0=self.y0, l0=self.l0)

    def params(self) -> DslParams:
        return DslParams(alpha=self.alpha, beta=self.beta, p=self.p, q=self.q, s=self.s)

    def estimator_config(self) -> EstimateConfig:
        return EstimateConfig(
            l_range=self._nat_range(self.l_range, self.l0),
            y_range=self._nat_range(self.y_range, self.y0),
            n_condition_bins=self.bins,
            bandwidth=self.bandwidth,
            bootstrap_reps=self.bootstrap,
            bootstrap_seed=self.bootstrap_seed,
        )

    @staticmethod
    def _nat_range(rng_log10, scale):
        if rng_log10 is None:
            return None
        return (rng_log10[0] * LN10 - math.log(scale), rng_log10[1] * LN10 - math.log(scale))

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def build_config(args: argparse.Namespace) -> tuple[RunConfig, set[str]]:
    """Merge defaults <- config file <- explicit flags; track explicit keys."""
    values: dict = {}
    explicit: set[str] = set()
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - _CONFIG_FIELDS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
        explicit.update(loaded)
    for name in _CONFIG_FIELDS:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            values[name] = flag_value
            explicit.add(name)
    if getattr(args, "no_plots", False):
        values["plots"] = False
        explicit.add("plots")
    for key in ("l_range", "y_range"):
        if values.get(key) is not None:
            values[key] = tuple(float(v) for v in values[key])
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    _validate_config(cfg)
    return cfg, explicit


def _validate_config(cfg: RunConfig) -> None:
    def need(cond: bool, message: str) -> None:
        if not cond:
            raise ConfigError(message)

    need(cfg.seed >= 0, f"seed must be >= 0, got {cfg.seed}")
    need(cfg.bootstrap_seed >= 0, f"bootstrap_seed must be >= 0, got {cfg.bootstrap_seed}")
    need(cfg.n >= 1, f"n must be >= 1, got {cfg.n}")
    need(cfg.bins >= 1, f"bins must be >= 1, got {cfg.bins}")
    need(cfg.bootstrap >= 1, f"bootstrap must be >= 1, got {cfg.bootstrap}")
    need(cfg.bandwidth is None or cfg.bandwidth > 0, "bandwidth must be positive")
    need(cfg.y0 > 0 and cfg.l0 > 0, "y0 and l0 must be positive")
    need(cfg.scatter_max >= 0, "scatter_max must be >= 0")
    need(cfg.feq_tol > 0 and cfg.identity_tol > 0, "tolerances must be positive")
    need(cfg.feq_span > 0 and cfg.feq_grid_n >= 2, "feq grid must have span > 0 and >= 2 points")
    for key, rng in (("l_range", cfg.l_range), ("y_range", cfg.y_range)):
        if rng is not None:
            need(len(rng) == 2 and rng[0] < rng[1], f"{key} must be LO HI with LO < HI")
    for key, v in (("mu_l", cfg.mu_l), ("mu_y", cfg.mu_y)):
        if v is not None:
            need(v > 0, f"{key} must be positive")


def _lognormal_params_or_config_error(cfg: RunConfig) -> DslParams:
    params = cfg.params()
    try:
        branch = validate_params(params)
    except NonNormalizableError as exc:
        raise ConfigError(f"invalid parameters: {exc}") from exc
    if branch is not Branch.LOGNORMAL:
        raise ConfigError("parameters sit on the power-law branch; synthesis needs alpha*beta < 1")
    return params


# ---------------------------------------------------------------- reporting


def _fit_dict(fit: RegressionFit, scale: float, axis_scale: float) -> dict:
    """Regression summary; fit_range also reported in log10 of the raw axis."""
    return {
        "slope": fit.slope,
        "slope_se": fit.slope_se,
        "intercept": fit.intercept,
        "intercept_se": fit.intercept_se,
        "r2": fit.r2,
        "n_used": fit.n_used,
        "fit_range_log": list(fit.fit_range),
        "fit_range_log10": [(v + math.log(axis_scale)) / LN10 for v in fit.fit_range],
    }


def _kernel_dict(k: KernelFit) -> dict:
    return {"bandwidth": k.bandwidth, "r2": k.r2, "grid_points": int(k.grid.size)}


def _phi_dict(fit: PhiFit) -> dict:
    return {
        "method": fit.method,
        "curvature": fit.curvature,
        "curvature_se": fit.curvature_se,
        "tilt_hat": fit.tilt_hat,
        "tilt_se": fit.tilt_se,
        "p_hat": fit.p_hat,
        "p_se": fit.p_se,
        "n_pooled": fit.n_pooled,
    }


def _collapse_dict(collapse) -> dict:
    ks = collapse.ks_matrix
    off = ks[np.triu_indices_from(ks, k=1)] if ks.shape[0] > 1 else np.zeros(0)
    return {
        "axis": collapse.axis,
        "exponent": collapse.exponent,
        "n_bins": len(collapse.samples),
        "n_dropped_bins": collapse.n_dropped_bins,
        "bin_counts": [int(s.size) for s in collapse.samples],
        "max_pairwise_ks": float(off.max()) if off.size else 0.0,
        "mean_pairwise_ks": float(off.mean()) if off.size else 0.0,
    }


def _estimate_results(est: EstimateResult, cfg: RunConfig) -> dict:
    return {
        "alpha": _fit_dict(est.alpha, cfg.l0, cfg.l0),
        "beta": _fit_dict(est.beta, cfg.y0, cfg.y0),
        "kernel_y_on_l": _kernel_dict(est.kernel_y_on_l),
        "kernel_l_on_y": _kernel_dict(est.kernel_l_on_y),
        "r2_pairs": {
            "y_on_l": {"nonparametric": est.kernel_y_on_l.r2, "linear": est.alpha.r2},
            "l_on_y": {"nonparametric": est.kernel_l_on_y.r2, "linear": est.beta.r2},
        },
        "phi_y": _phi_dict(est.phi_y),
        "phi_y_mle": _phi_dict(est.phi_y_mle),
        "phi_l": _phi_dict(est.phi_l),
        "phi_l_mle": _phi_dict(est.phi_l_mle),
        "p_combined": est.p_combined,
        "p_combined_se": est.p_combined_se,
        "collapse_y": _collapse_dict(est.collapse_y),
        "collapse_l": _collapse_dict(est.collapse_l),
    }


def _productivity_results(prod: ProductivityResult, cfg: RunConfig) -> dict:
    return {
        "beta_t": _fit_dict(prod.beta_t, cfg.y0 / cfg.l0, cfg.y0 / cfg.l0),
        "kernel_l_on_c": _kernel_dict(prod.kernel_l_on_c),
        "gamma1": prod.gamma1,
        "gamma1_se": prod.gamma1_se,
        "var_c": prod.var_c,
        "psi": _phi_dict(prod.psi) if prod.psi is not None else None,
        "psi_mle": _phi_dict(prod.psi_mle) if prod.psi_mle is not None else None,
        "collapse_c": _collapse_dict(prod.collapse_c),
    }


# ---------------------------------------------------------------- series


def _pooled_histogram(pooled: np.ndarray, n_bins: int):
    lo, hi = np.quantile(pooled, [0.005, 0.995])
    counts, edges = np.histogram(pooled, bins=np.linspace(lo, hi, n_bins + 1))
    widths = np.diff(edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    density = counts / (counts.sum() * widths)
    return centers, density


def _curve(coeffs, x):
    c2, c1, c0 = coeffs
    return np.exp(c2 * x * x + c1 * x + c0)


def _emit_collapse_series(report: RunReport, name: str, collapse, wls: PhiFit, mle: PhiFit, ln_scale: float, label: str) -> None:
    centers, density = _pooled_histogram(collapse.pooled, 60)
    report.add_series(
        name,
        [f"log10_{label}", "density_per_decade", "wls_fit_per_decade", "mle_fit_per_decade"],
        [
            (centers + ln_scale) / LN10,
            density * LN10,
            _curve(wls.log_density_coeffs, centers) * LN10,
            _curve(mle.log_density_coeffs, centers) * LN10,
        ],
    )


def _emit_estimate_series(report: RunReport, table: FirmTable, est: EstimateResult, cfg: RunConfig) -> None:
    ln_y0, ln_l0 = math.log(cfg.y0), math.log(cfg.l0)
    rng = np.random.default_rng(cfg.seed)
    take = min(cfg.scatter_max, table.n)
    idx = np.sort(rng.choice(table.n, size=take, replace=False))
    report.add_series(
        "fig1_scatter.csv",
        ["log10_L", "log10_Y"],
        [(table.l[idx] + ln_l0) / LN10, (table.y[idx] + ln_y0) / LN10],
    )
    k = est.kernel_y_on_l
    report.add_series(
        "fig1_kernel.csv",
        ["log10_L", "mean_log10_Y", "ci_low_log10_Y", "ci_high_log10_Y"],
        [
            (k.grid + ln_l0) / LN10,
            (k.estimate + ln_y0) / LN10,
            (k.ci_low + ln_y0) / LN10,
            (k.ci_high + ln_y0) / LN10,
        ],
    )
    rows_idx: list[int] = []
    rows_center: list[float] = []
    rows_x: list[float] = []
    rows_f: list[float] = []
    for i, h in enumerate(est.conditionals):
        centers = 0.5 * (h.edges[:-1] + h.edges[1:])
        rows_idx.extend([i] * centers.size)
        rows_center.extend([(h.cond_center + ln_l0) / LN10] * centers.size)
        rows_x.extend(((centers + ln_y0) / LN10).tolist())
        rows_f.extend((h.density * LN10).tolist())
    report.add_series(
        "fig2a_conditional.csv",
        ["bin_index", "log10_L_center", "log10_Y", "density_per_decade"],
        [np.array(rows_idx), np.array(rows_center), np.array(rows_x), np.array(rows_f)],
    )
    _emit_collapse_series(report, "fig2b_collapse.csv", est.collapse_y, est.phi_y, est.phi_y_mle, ln_y0, "Y_scaled")
    _emit_collapse_series(report, "fig3_collapse.csv", est.collapse_l, est.phi_l, est.phi_l_mle, ln_l0, "L_scaled")


def _emit_productivity_series(
    report: RunReport, table: FirmTable, prod: ProductivityResult, theory_beta_t: float, cfg: RunConfig
) -> None:
    ln_l0 = math.log(cfg.l0)
    ln_c0 = math.log(cfg.y0 / cfg.l0)
    rng = np.random.default_rng(cfg.seed + 1)
    take = min(cfg.scatter_max, table.n)
    idx = np.sort(rng.choice(table.n, size=take, replace=False))
    report.add_series(
        "fig4_scatter.csv",
        ["log10_C", "log10_L"],
        [(table.c[idx] + ln_c0) / LN10, (table.l[idx] + ln_l0) / LN10],
    )
    k = prod.kernel_l_on_c
    report.add_series(
        "fig4_kernel.csv",
        ["log10_C", "mean_log10_L", "ci_low_log10_L", "ci_high_log10_L"],
        [
            (k.grid + ln_c0) / LN10,
            (k.estimate + ln_l0) / LN10,
            (k.ci_low + ln_l0) / LN10,
            (k.ci_high + ln_l0) / LN10,
        ],
    )
    c_mean = float(table.c.mean())
    l_mean = float(table.l.mean())
    theory_l = l_mean + theory_beta_t * (k.grid - c_mean)
    report.add_series(
        "fig4_theory.csv",
        ["log10_C", "theory_log10_L"],
        [(k.grid + ln_c0) / LN10, (theory_l + ln_l0) / LN10],
    )
    if prod.psi is not None:
        _emit_collapse_series(
            report, "fig5_collapse.csv", prod.collapse_c, prod.psi, prod.psi_mle, ln_l0, "L_scaled"
        )


def _render_estimate_plots(report: RunReport, table: FirmTable, est: EstimateResult, cfg: RunConfig) -> None:
    from . import plots

    ln_y0, ln_l0 = math.log(cfg.y0), math.log(cfg.l0)
    rng = np.random.default_rng(cfg.seed)
    take = min(cfg.scatter_max, table.n)
    idx = np.sort(rng.choice(table.n, size=take, replace=False))
    k = est.kernel_y_on_l
    slope10 = est.alpha.slope
    intercept10 = (est.alpha.intercept + ln_y0 - est.alpha.slope * ln_l0) / LN10
    x0, x1 = [(v + ln_l0) / LN10 for v in est.alpha.fit_range]
    plots.scatter_with_kernel(
        report.path("fig1.png"),
        (table.l[idx] + ln_l0) / LN10,
        (table.y[idx] + ln_y0) / LN10,
        (k.grid + ln_l0) / LN10,
        (k.estimate + ln_y0) / LN10,
        (k.ci_low + ln_y0) / LN10,
        (k.ci_high + ln_y0) / LN10,
        (slope10, intercept10, (x0, x1)),
        "log10 L",
        "log10 Y",
        line_label=f"slope {est.alpha.slope:.3f}",
    )
    report.add_file("fig1.png")
    curves = []
    for h in est.conditionals:
        centers = 0.5 * (h.edges[:-1] + h.edges[1:])
        curves.append(
            (
                f"log10 L = {(h.cond_center + ln_l0) / LN10:.2f}",
                (centers + ln_y0) / LN10,
                h.density * LN10,
            )
        )
    plots.conditional_densities(report.path("fig2a.png"), curves, "log10 Y")
    report.add_file("fig2a.png")
    for name, collapse, wls, ln_scale, xlabel in (
        ("fig2b.png", est.collapse_y, est.phi_y, ln_y0, "log10 scaled Y"),
        ("fig3.png", est.collapse_l, est.phi_l, ln_l0, "log10 scaled L"),
    ):
        centers, density = _pooled_histogram(collapse.pooled, 60)
        plots.collapse_with_fit(
            report.path(name),
            (centers + ln_scale) / LN10,
            density * LN10,
            (centers + ln_scale) / LN10,
            _curve(wls.log_density_coeffs, centers) * LN10,
            xlabel,
        )
        report.add_file(name)


def _render_productivity_plots(
    report: RunReport, table: FirmTable, prod: ProductivityResult, theory_beta_t: float, cfg: RunConfig
) -> None:
    from . import plots

    ln_l0 = math.log(cfg.l0)
    ln_c0 = math.log(cfg.y0 / cfg.l0)
    rng = np.random.default_rng(cfg.seed + 1)
    take = min(cfg.scatter_max, table.n)
    idx = np.sort(rng.choice(table.n, size=take, replace=False))
    k = prod.kernel_l_on_c
    c_mean = float(table.c.mean())
    l_mean = float(table.l.mean())
    slope10 = theory_beta_t
    intercept10 = (l_mean - theory_beta_t * c_mean + ln_l0 - theory_beta_t * ln_c0) / LN10
    grid10 = (k.grid + ln_c0) / LN10
    plots.scatter_with_kernel(
        report.path("fig4.png"),
        (table.c[idx] + ln_c0) / LN10,
        (table.l[idx] + ln_l0) / LN10,
        grid10,
        (k.estimate + ln_l0) / LN10,
        (k.ci_low + ln_l0) / LN10,
        (k.ci_high + ln_l0) / LN10,
        (slope10, intercept10, (float(grid10[0]), float(grid10[-1]))),
        "log10 C",
        "log10 L",
        line_label=f"theory slope {theory_beta_t:.4f}",
    )
    report.add_file("fig4.png")
    if prod.psi is not None:
        centers, density = _pooled_histogram(prod.collapse_c.pooled, 60)
        plots.collapse_with_fit(
            report.path("fig5.png"),
            (centers + ln_l0) / LN10,
            density * LN10,
            (centers + ln_l0) / LN10,
            _curve(prod.psi.log_density_coeffs, centers) * LN10,
            "log10 scaled L",
        )
        report.add_file("fig5.png")


# ---------------------------------------------------------------- commands


def run_generate(cfg: RunConfig, explicit: set[str]) -> int:
    params = _lognormal_params_or_config_error(cfg)
    report = RunReport("generate", cfg.as_dict(), cfg.out)
    spec = SynthesisSpec(
        params=params, scales=cfg.scales(), n=cfg.n, seed=cfg.seed, round_labor=cfg.round_labor
    )
    table = sample_firms(spec)
    table.write_csv(report.path("firms.csv"))
    report.add_file("firms.csv")
    report.doc["results"] = {"n": table.n, "seed": cfg.seed, "csv": "firms.csv"}
    report.write()
    print(f"wrote {table.n} firms to {report.path('firms.csv')}")
    return 0


def _load_input(cfg: RunConfig) -> FirmTable:
    if not cfg.input:
        raise ConfigError("--input CSV is required for this command")
    return ingest_csv(cfg.input, cfg.scales())


def run_estimate(cfg: RunConfig, explicit: set[str]) -> int:
    table = _load_input(cfg)
    report = RunReport("estimate", cfg.as_dict(), cfg.out)
    if table.rejected:
        report.warn(f"{table.rejected} input rows rejected")
    try:
        est = estimate_all(table, cfg.estimator_config())
    except DslError as exc:
        report.doc["results"]["error"] = {"type": type(exc).__name__, "message": str(exc)}
        report.write()
        raise
    report.doc["results"] = _estimate_results(est, cfg)
    _emit_estimate_series(report, table, est, cfg)
    if cfg.plots:
        _render_estimate_plots(report, table, est, cfg)
    report.write()
    print(
        f"alpha = {est.alpha.slope:.4f} (+-{est.alpha.slope_se:.4f}), "
        f"beta = {est.beta.slope:.4f} (+-{est.beta.slope_se:.4f}), "
        f"p = {est.p_combined:.4f} (+-{est.p_combined_se:.4f})"
    )
    return 0


def run_productivity(cfg: RunConfig, explicit: set[str]) -> int:
    table = _load_input(cfg)
    report = RunReport("productivity", cfg.as_dict(), cfg.out)
    if table.rejected:
        report.warn(f"{table.rejected} input rows rejected")
    theory_source = "config" if {"alpha", "beta", "p"} & explicit else "estimated"
    try:
        if theory_source == "config":
            params = _lognormal_params_or_config_error(cfg)
            alpha_hat = params.alpha
        else:
            est = estimate_all(table, cfg.estimator_config())
            params = DslParams(est.alpha.slope, est.beta.slope, est.p_combined, 0.0, 0.0)
            alpha_hat = est.alpha.slope
            report.doc["results"]["size_estimates"] = _estimate_results(est, cfg)
        theory = derive_productivity(params)
        prod = estimate_productivity(table, cfg.estimator_config(), alpha_hat=alpha_hat)
    except DslError as exc:
        report.doc["results"]["error"] = {"type": type(exc).__name__, "message": str(exc)}
        report.write()
        raise
    report.doc["results"]["productivity"] = _productivity_results(prod, cfg)
    report.doc["results"]["theory"] = {
        "source": theory_source,
        "params": dataclasses.asdict(params),
        **dataclasses.asdict(theory),
    }
    for w in prod.warnings:
        report.warn(w)
    _emit_productivity_series(report, table, prod, theory.beta_t, cfg)
    if cfg.plots:
        _render_productivity_plots(report, table, prod, theory.beta_t, cfg)
    report.write()
    print(
        f"beta_t = {prod.beta_t.slope:.4f} (+-{prod.beta_t.slope_se:.4f}) vs theory {theory.beta_t:.4f}; "
        f"gamma1 = {prod.gamma1:.4f} (+-{prod.gamma1_se:.4f}) vs theory {theory.gamma1:.4f}"
    )
    return 0


def _verify_lognormal(cfg: RunConfig, report: RunReport) -> bool:
    params = cfg.params()
    scales = cfg.scales()
    ledger = identity_suite(params, tol=cfg.identity_tol)
    residual = feq_residual(
        lambda u: scaling_function_Y(u, params, scales),
        lambda u: scaling_function_L(u, params, scales),
        params.alpha,
        params.beta,
        scales,
        span=cfg.feq_span,
        n_grid=cfg.feq_grid_n,
    )
    report.doc["results"]["identities"] = [dataclasses.asdict(c) for c in ledger.checks]
    report.doc["results"]["feq"] = dataclasses.asdict(residual)
    ok = ledger.all_passed and residual.max_rel < cfg.feq_tol
    report.doc["results"]["passed"] = ok
    return ok


def _verify_powerlaw(cfg: RunConfig, report: RunReport) -> bool:
    from .verify import demo_smooth_phi_y

    alpha, beta, a = powerlaw_relations(cfg.mu_l, cfg.mu_y)
    scales = cfg.scales()
    phi_y = demo_smooth_phi_y(scales)
    phi_l = build_powerlaw_phi_l(phi_y, alpha, a, scales)
    residual = feq_residual(
        phi_y, phi_l, alpha, beta, scales, span=cfg.feq_span, n_grid=cfg.feq_grid_n
    )
    product_err = abs(alpha * beta - 1.0)
    report.doc["results"]["powerlaw"] = {
        "mu_l": cfg.mu_l,
        "mu_y": cfg.mu_y,
        "alpha": alpha,
        "beta": beta,
        "a": a,
        "alpha_beta_minus_1": product_err,
        "feq": dataclasses.asdict(residual),
    }
    ok = product_err <= 1e-12 and residual.max_rel < cfg.feq_tol
    report.doc["results"]["passed"] = ok
    return ok


def _verify_grids(cfg: RunConfig, report: RunReport) -> bool:
    def load_grid(path):
        data = np.genfromtxt(path, delimiter=",", names=True)
        if data.dtype.names is None or set(data.dtype.names) != {"x", "value"}:
            raise DataError(f"{path}: expected header 'x,value'")
        return PhiGrid(np.atleast_1d(data["x"]), np.atleast_1d(data["value"]))

    scales = cfg.scales()
    params = cfg.params()
    phi_y = load_grid(cfg.phi_y_grid) if cfg.phi_y_grid else (
        lambda u: scaling_function_Y(u, params, scales)
    )
    phi_l = load_grid(cfg.phi_l_grid) if cfg.phi_l_grid else (
        lambda u: scaling_function_L(u, params, scales)
    )
    residual = feq_residual(
        phi_y, phi_l, cfg.alpha, cfg.beta, scales, span=cfg.feq_span, n_grid=cfg.feq_grid_n
    )
    ok = residual.max_rel < cfg.feq_tol
    report.doc["results"]["feq_grids"] = {
        "phi_y_grid": cfg.phi_y_grid,
        "phi_l_grid": cfg.phi_l_grid,
        **dataclasses.asdict(residual),
        "passed": ok,
    }
    if not ok:
        report.doc["results"]["failing_check"] = (
            f"grid functional-equation residual {residual.max_rel:.3e} >= {cfg.feq_tol:.1e}"
        )
    return ok


def run_verify(cfg: RunConfig, explicit: set[str]) -> int:
    report = RunReport("verify", cfg.as_dict(), cfg.out)
    if cfg.phi_y_grid or cfg.phi_l_grid:
        ok = _verify_grids(cfg, report)
    elif cfg.mu_l is not None or cfg.mu_y is not None:
        if cfg.mu_l is None or cfg.mu_y is None:
            raise ConfigError("power-law verification needs both --mu-l and --mu-y")
        ok = _verify_powerlaw(cfg, report)
    else:
        _lognormal_params_or_config_error(cfg)
        ok = _verify_lognormal(cfg, report)
    report.doc["results"]["passed"] = ok
    report.write()
    print("verification " + ("passed" if ok else "FAILED"))
    return 0 if ok else 4


def _row_status(value: float, target: float, tol: float, se: float) -> str:
    if abs(value - target) <= tol:
        return "pass"
    if 2.0 * se > tol:
        return "inconclusive"
    return "fail"


def run_reproduce(cfg: RunConfig, explicit: set[str]) -> int:
    params = _lognormal_params_or_config_error(cfg)
    scales = cfg.scales()
    report = RunReport("reproduce", cfg.as_dict(), cfg.out)
    table = sample_firms(
        SynthesisSpec(params=params, scales=scales, n=cfg.n, seed=cfg.seed, round_labor=cfg.round_labor)
    )
    table.write_csv(report.path("firms.csv"))
    report.add_file("firms.csv")

    est = estimate_all(table, cfg.estimator_config())
    prod = estimate_productivity(table, cfg.estimator_config(), alpha_hat=est.alpha.slope)
    theory = derive_productivity(params)

    report.doc["results"]["estimate"] = _estimate_results(est, cfg)
    report.doc["results"]["productivity"] = _productivity_results(prod, cfg)
    report.doc["results"]["theory"] = dataclasses.asdict(theory)

    ledger = identity_suite(params, tol=cfg.identity_tol)
    residual = feq_residual(
        lambda u: scaling_function_Y(u, params, scales),
        lambda u: scaling_function_L(u, params, scales),
        params.alpha,
        params.beta,
        scales,
        span=cfg.feq_span,
        n_grid=cfg.feq_grid_n,
    )
    verified = ledger.all_passed and residual.max_rel < cfg.feq_tol
    report.doc["results"]["identities"] = [dataclasses.asdict(c) for c in ledger.checks]
    report.doc["results"]["feq"] = dataclasses.asdict(residual)

    rows = [
        ("alpha", est.alpha.slope, params.alpha, REPRODUCE_TOL["alpha"], est.alpha.slope_se),
        ("beta", est.beta.slope, params.beta, REPRODUCE_TOL["beta"], est.beta.slope_se),
        ("p_combined", est.p_combined, params.p, REPRODUCE_TOL["p_combined"], est.p_combined_se),
        ("beta_t", prod.beta_t.slope, theory.beta_t, REPRODUCE_TOL["beta_t"], prod.beta_t.slope_se),
        ("gamma1", prod.gamma1, theory.gamma1, REPRODUCE_TOL["gamma1"], prod.gamma1_se),
    ]
    summary = []
    for name, value, target, tol, se in rows:
        summary.append(
            {
                "name": name,
                "estimate": value,
                "target": target,
                "tolerance": tol,
                "se": se,
                "status": _row_status(value, target, tol, se),
            }
        )
    report.doc["results"]["summary"] = summary
    report.doc["results"]["verified"] = verified

    _emit_estimate_series(report, table, est, cfg)
    _emit_productivity_series(report, table, prod, theory.beta_t, cfg)
    if cfg.plots:
        _render_estimate_plots(report, table, est, cfg)
        _render_productivity_plots(report, table, prod, theory.beta_t, cfg)
    report.write()

    width = max(len(r["name"]) for r in summary)
    print(f"{'name':<{width}}  {'estimate':>10}  {'target':>10}  {'tol':>7}  status")
    for r in summary:
        print(
            f"{r['name']:<{width}}  {r['estimate']:>10.4f}  {r['target']:>10.4f}  "
            f"{r['tolerance']:>7.3g}  {r['status']}"
        )
    print("identity/functional-equation checks " + ("passed" if verified else "FAILED"))
    failed = any(r["status"] == "fail" for r in summary) or not verified
    return 4 if failed else 0


# ---------------------------------------------------------------- parsing


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON config file; explicit flags override it")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--p", type=float)
    sp.add_argument("--q", type=float)
    sp.add_argument("--s", type=float)
    sp.add_argument("--y0", type=float)
    sp.add_argument("--l0", type=float)
    sp.add_argument("--l-range", dest="l_range", nargs=2, type=float, metavar=("LO", "HI"),
                    help="labor fit window in log10 of raw labor")
    sp.add_argument("--y-range", dest="y_range", nargs=2, type=float, metavar=("LO", "HI"),
                    help="sales fit window in log10 of raw sales")
    sp.add_argument("--bins", type=int, help="number of conditioning bins")
    sp.add_argument("--bandwidth", type=float, help="kernel bandwidth in natural-log units")
    sp.add_argument("--bootstrap", type=int, help="bootstrap replicates for kernel bands")
    sp.add_argument("--bootstrap-seed", dest="bootstrap_seed", type=int)
    sp.add_argument("--out", help="output directory (default: out)")
    sp.add_argument("--scatter-max", dest="scatter_max", type=int,
                    help="max scatter points per series file")
    sp.add_argument("--no-plots", dest="no_plots", action="store_true",
                    help="skip PNG rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dslaw",
        description="Scaling-law toolkit for firm sales/labor data: synthesize, estimate, verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("generate", help="write a seeded synthetic firm CSV")
    _add_common(sp)
    sp.add_argument("--round-labor", dest="round_labor", action="store_const", const=True,
                    help="round labor to whole workers (floor 1)")

    sp = sub.add_parser("estimate", help="recover the scaling exponents from a firm CSV")
    _add_common(sp)
    sp.add_argument("--input", help="firm CSV (header firm_id,Y,L)")

    sp = sub.add_parser("productivity", help="productivity-side estimates from a firm CSV")
    _add_common(sp)
    sp.add_argument("--input", help="firm CSV (header firm_id,Y,L)")

    sp = sub.add_parser("verify", help="check the identity web and functional equation")
    _add_common(sp)
    sp.add_argument("--mu-l", dest="mu_l", type=float, help="labor Pareto exponent (power-law branch)")
    sp.add_argument("--mu-y", dest="mu_y", type=float, help="sales Pareto exponent (power-law branch)")
    sp.add_argument("--phi-y-grid", dest="phi_y_grid", help="CSV grid (x,value) for the sales function")
    sp.add_argument("--phi-l-grid", dest="phi_l_grid", help="CSV grid (x,value) for the labor function")
    sp.add_argument("--feq-tol", dest="feq_tol", type=float, help="functional-equation threshold")
    sp.add_argument("--identity-tol", dest="identity_tol", type=float, help="identity threshold")
    sp.add_argument("--feq-span", dest="feq_span", type=float, help="half-width of the log grid")
    sp.add_argument("--feq-grid-n", dest="feq_grid_n", type=int, help="grid points per axis")

    sp = sub.add_parser("reproduce", help="end-to-end seeded run with a pass/fail summary")
    _add_common(sp)
    sp.add_argument("--round-labor", dest="round_labor", action="store_const", const=True)
    sp.add_argument("--feq-tol", dest="feq_tol", type=float)
    sp.add_argument("--identity-tol", dest="identity_tol", type=float)
    sp.add_argument("--feq-span", dest="feq_span", type=float)
    sp.add_argument("--feq-grid-n", dest="feq_grid_n", type=int)
    return parser


_RUNNERS = {
    "generate": run_generate,
    "estimate": run_estimate,
    "productivity": run_productivity,
    "verify": run_verify,
    "reproduce": run_reproduce,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, explicit = build_config(args)
        return _RUNNERS[args.command](cfg, explicit)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, DomainError, SingularProductivityError, NonNormalizableError, DomainExhaustedError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
