import dataclasses
import math

import numpy as np
import pytest

from dslaw import (
    DomainExhaustedError,
    DslParams,
    NonNormalizableError,
    PhiGrid,
    ReferenceScales,
    build_powerlaw_phi_l,
    derive_productivity,
    feq_residual,
    identity_suite,
    mc_cross_check,
    powerlaw_relations,
    scaling_function_L,
    scaling_function_Y,
)
from dslaw.verify import demo_smooth_phi_y


def closed_form_pair(params, scales):
    return (
        lambda u: scaling_function_Y(u, params, scales),
        lambda u: scaling_function_L(u, params, scales),
    )


class TestFunctionalEquation:
    def test_closed_form_solutions_satisfy_it(self, paper_params, scales):
        phi_y, phi_l = closed_form_pair(paper_params, scales)
        rep = feq_residual(phi_y, phi_l, paper_params.alpha, paper_params.beta, scales)
        assert rep.n_skipped == 0
        assert rep.n_evaluated == 2500
        assert rep.max_rel < 1e-10

    def test_closed_form_with_tilts(self, scales):
        params = DslParams(1.2, 0.5, 0.9, q=0.6, s=-0.4)
        phi_y, phi_l = closed_form_pair(params, scales)
        rep = feq_residual(phi_y, phi_l, params.alpha, params.beta, scales)
        assert rep.max_rel < 1e-10

    def test_powerlaw_construction_satisfies_it(self, scales):
        # one arbitrary smooth sales-side function generates the labor side
        alpha, beta, a = powerlaw_relations(2.0, 1.0)
        phi_y = demo_smooth_phi_y(scales)
        phi_l = build_powerlaw_phi_l(phi_y, alpha, a, scales)
        rep = feq_residual(phi_y, phi_l, alpha, beta, scales)
        assert rep.max_rel < 1e-8

    def test_powerlaw_prefactor_exponent_is_free(self, scales):
        # the consistency equation is insensitive to the power prefactor
        alpha, beta, _ = powerlaw_relations(1.5, 1.0 / 1.5)
        phi_y = demo_smooth_phi_y(scales)
        for a in (-5.0, 0.0, 2.5):
            phi_l = build_powerlaw_phi_l(phi_y, alpha, a, scales)
            assert feq_residual(phi_y, phi_l, alpha, beta, scales).max_rel < 1e-8

    def test_mismatched_curvature_fails_loudly(self, scales):
        # sales side built at p = 0.698, labor side at p = 1.0
        pa = DslParams(1.037, 0.655, 0.698)
        pb = DslParams(1.037, 0.655, 1.0)
        rep = feq_residual(
            lambda u: scaling_function_Y(u, pa, scales),
            lambda u: scaling_function_L(u, pb, scales),
            pa.alpha,
            pa.beta,
            scales,
        )
        assert rep.max_rel > 0.1

    def test_invariant_under_function_rescaling(self, paper_params, scales):
        phi_y, phi_l = closed_form_pair(paper_params, scales)
        base = feq_residual(phi_y, phi_l, paper_params.alpha, paper_params.beta, scales)
        for k in (1e-3, 1.0, 1e3):
            rep = feq_residual(
                lambda u, k=k: k * phi_y(u),
                phi_l,
                paper_params.alpha,
                paper_params.beta,
                scales,
            )
            assert abs(rep.max_rel - base.max_rel) < 1e-12

    def test_invariant_under_reference_move(self, paper_params, scales):
        # the closed-form pair anchored at the default scales still solves the
        # equation when the evaluation reference moves inside the domain
        phi_y, phi_l = closed_form_pair(paper_params, scales)
        moved = ReferenceScales(y0=scales.y0 * math.exp(0.5), l0=scales.l0 * math.exp(-0.3))
        rep = feq_residual(phi_y, phi_l, paper_params.alpha, paper_params.beta, moved)
        assert rep.max_rel < 1e-9

    def test_grid_interpolation_error_below_1e6(self, paper_params, scales):
        # single-function log-log interpolation error at the documented
        # density stays under 1e-6
        span = 8.0
        grid_y = PhiGrid.from_function(
            lambda u: scaling_function_Y(u, paper_params, scales),
            scales.y0 * math.exp(-span),
            scales.y0 * math.exp(span),
            8193,
        )
        probe = scales.y0 * np.exp(np.linspace(-6.0, 6.0, 1111))
        exact = np.log(scaling_function_Y(probe, paper_params, scales))
        assert np.abs(grid_y.log_value(probe) - exact).max() < 1e-6

    def test_grid_inputs_interpolate_accurately(self, paper_params, scales):
        span = 8.0
        grid_y = PhiGrid.from_function(
            lambda u: scaling_function_Y(u, paper_params, scales),
            scales.y0 * math.exp(-span),
            scales.y0 * math.exp(span),
            16385,
        )
        grid_l = PhiGrid.from_function(
            lambda u: scaling_function_L(u, paper_params, scales),
            scales.l0 * math.exp(-span),
            scales.l0 * math.exp(span),
            16385,
        )
        rep = feq_residual(grid_y, grid_l, paper_params.alpha, paper_params.beta, scales)
        assert rep.n_skipped == 0
        assert rep.max_rel < 1e-6

    def test_narrow_grid_skips_points(self, paper_params, scales):
        phi_y = PhiGrid.from_function(
            lambda u: scaling_function_Y(u, paper_params, scales),
            scales.y0 * math.exp(-1.5),
            scales.y0 * math.exp(1.5),
            513,
        )
        _, phi_l = closed_form_pair(paper_params, scales)
        rep = feq_residual(phi_y, phi_l, paper_params.alpha, paper_params.beta, scales)
        assert rep.n_skipped > 0
        assert rep.n_evaluated + rep.n_skipped == 2500

    def test_domain_exhausted(self, paper_params, scales):
        # grid nowhere near the reference point
        phi_y = PhiGrid.from_function(
            lambda u: scaling_function_Y(u, paper_params, scales),
            scales.y0 * math.exp(20.0),
            scales.y0 * math.exp(22.0),
            65,
        )
        _, phi_l = closed_form_pair(paper_params, scales)
        with pytest.raises(DomainExhaustedError):
            feq_residual(phi_y, phi_l, paper_params.alpha, paper_params.beta, scales)


class TestPhiGrid:
    def test_validation(self):
        with pytest.raises(ValueError):
            PhiGrid(np.array([1.0, 0.5]), np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            PhiGrid(np.array([1.0, 2.0]), np.array([1.0, -1.0]))
        with pytest.raises(ValueError):
            PhiGrid(np.array([-1.0, 2.0]), np.array([1.0, 1.0]))

    def test_loglog_interpolation_is_exact_on_power_laws(self):
        x = np.exp(np.linspace(0.0, 3.0, 7))
        grid = PhiGrid(x, x**-2.5)
        probe = np.exp(np.array([0.4, 1.7, 2.9]))
        np.testing.assert_allclose(grid.log_value(probe), -2.5 * np.log(probe), rtol=1e-12)

    def test_out_of_domain_is_nan(self):
        grid = PhiGrid(np.array([1.0, 2.0]), np.array([1.0, 1.0]))
        assert np.isnan(grid.log_value(0.5))
        assert np.isnan(grid.log_value(3.0))


class TestIdentitySuite:
    def test_paper_parameters_pass(self, paper_params):
        ledger = identity_suite(paper_params)
        assert ledger.all_passed
        assert len(ledger.checks) >= 15

    def test_symmetric_case_passes(self):
        assert identity_suite(DslParams(0.9, 0.9, 1.0)).all_passed

    @pytest.mark.parametrize("alpha", [0.8, 1.037, 1.3])
    @pytest.mark.parametrize("beta", [0.4, 0.655])
    @pytest.mark.parametrize("p", [0.5, 0.698, 1.0])
    def test_full_grid_passes(self, alpha, beta, p):
        assert identity_suite(DslParams(alpha, beta, p)).all_passed

    def test_corrupted_gamma1_fails_only_gamma1_rows(self, paper_params):
        pp = derive_productivity(paper_params)
        corrupted = dataclasses.replace(pp, gamma1=pp.gamma1 * 1.01)
        ledger = identity_suite(paper_params, productivity=corrupted)
        assert not ledger.all_passed
        for check in ledger.checks:
            if "gamma1" in check.name:
                assert not check.passed
            else:
                assert check.passed

    def test_degeneration_rows_present(self, paper_params):
        names = [c.name for c in identity_suite(paper_params).checks]
        assert sum("gap 1e-" in n for n in names) == 5

    def test_power_law_branch_rejected(self):
        with pytest.raises(NonNormalizableError):
            identity_suite(DslParams(2.0, 0.5, 1.0))

    def test_deterministic_and_order_stable(self, paper_params):
        a = identity_suite(paper_params)
        b = identity_suite(paper_params)
        assert [c.name for c in a.checks] == [c.name for c in b.checks]
        assert [c.lhs for c in a.checks] == [c.lhs for c in b.checks]


class TestMcCrossCheck:
    def test_large_sample_passes(self, paper_params):
        rep = mc_cross_check(paper_params, n=1_000_000, seed=0)
        assert rep.status == "pass"
        assert rep.all_passed

    def test_slope_check_targets_beta_t(self, paper_params):
        rep = mc_cross_check(paper_params, n=200_000, seed=4)
        slope = next(c for c in rep.checks if c.name == "E(l|c) slope")
        assert slope.target == pytest.approx(0.072662129344, abs=1e-9)
        assert abs(slope.value - slope.target) <= 3.0 * slope.se

    def test_tiny_sample_is_inconclusive_not_failed(self, paper_params):
        rep = mc_cross_check(paper_params, n=10, seed=0)
        assert rep.status == "insufficient-precision"
