import math

import numpy as np
import pytest

from dslaw import (
    DomainError,
    DslParams,
    PowerLawParams,
    conditional_pdf_L_given_C,
    conditional_pdf_L_given_Y,
    conditional_pdf_Y_given_L,
    derive_productivity,
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
    to_gaussian,
)
from conftest import trapezoid_2d


def log_grid(center, sd, half_width=6.0, n=400):
    return np.linspace(center - half_width * sd, center + half_width * sd, n)


class TestLogJointDensity:
    def test_vanishes_at_reference_point(self, paper_params):
        assert log_joint_density(0.0, 0.0, paper_params) == 0.0
        assert log_joint_density(0.0, 0.0, DslParams(0.8, 0.4, 0.5, q=1.0, s=-2.0)) == 0.0

    def test_exponent_formula(self, paper_params):
        # independent arithmetic for -a*p*l^2 + 2*a*b*p*l*y - b*p*y^2 + s*l + q*y
        params = DslParams(1.037, 0.655, 0.698, q=0.2, s=0.1)
        y, l = 0.7, -1.3
        a, b, p = params.alpha, params.beta, params.p
        expected = -a * p * l * l + 2 * a * b * p * l * y - b * p * y * y + 0.1 * l + 0.2 * y
        assert log_joint_density(y, l, params) == pytest.approx(expected, rel=1e-14)


class TestJointPdf:
    def test_integrates_to_one(self, paper_params, scales):
        g = to_gaussian(paper_params)
        ys = log_grid(g.mu_y, math.sqrt(g.sig_yy))
        ls = log_grid(g.mu_l, math.sqrt(g.sig_ll))
        sales = scales.y0 * np.exp(ys)
        labor = scales.l0 * np.exp(ls)
        f = joint_pdf(sales[:, None], labor[None, :], paper_params, scales)
        # d(sales) d(labor) = sales*labor dy dl on the log grid
        total = trapezoid_2d(f * sales[:, None] * labor[None, :], ys, ls)
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_reference_ratio_kills_normalization(self, paper_params, scales):
        # moving sales up by one natural log at q=s=0 multiplies the density
        # by exp(-beta*p) = exp(-0.457190)
        ratio = joint_pdf(scales.y0 * math.e, scales.l0, paper_params, scales) / joint_pdf(
            scales.y0, scales.l0, paper_params, scales
        )
        assert ratio == pytest.approx(math.exp(-0.45719), rel=1e-10)
        assert ratio == pytest.approx(0.633060047226, abs=1e-9)

    def test_matches_unnormalized_exponent(self, paper_params, scales):
        pts = [(0.5, 0.2), (-1.0, 2.0), (1.5, -0.7)]
        f0 = joint_pdf(scales.y0, scales.l0, paper_params, scales)
        for y, l in pts:
            lhs = joint_pdf(scales.y0 * math.exp(y), scales.l0 * math.exp(l), paper_params, scales)
            rel = math.log(lhs / f0)
            assert rel == pytest.approx(log_joint_density(y, l, paper_params), abs=1e-10)

    def test_rejects_nonpositive_arguments(self, paper_params):
        with pytest.raises(DomainError):
            joint_pdf(-1.0, 10.0, paper_params)
        with pytest.raises(DomainError):
            joint_pdf(1.0, 0.0, paper_params)


class TestMarginals:
    def test_quadratic_coefficient_in_log_labor(self, paper_params, scales):
        # symmetric second difference of ln P_L at +-1 equals twice the
        # quadratic coefficient -alpha*(1-alpha*beta)*p = -0.232178
        vals = [
            math.log(marginal_pdf_L(scales.l0 * math.exp(x), paper_params, scales))
            for x in (-1.0, 0.0, 1.0)
        ]
        second_diff = vals[0] + vals[2] - 2.0 * vals[1]
        assert second_diff == pytest.approx(2.0 * -0.232178046890, abs=1e-9)

    def test_linear_coefficient_in_log_labor(self, paper_params, scales):
        # antisymmetric first difference gives the linear term s+(q+1)*alpha
        vals = [
            math.log(marginal_pdf_L(scales.l0 * math.exp(x), paper_params, scales))
            for x in (-1.0, 1.0)
        ]
        assert 0.5 * (vals[1] - vals[0]) == pytest.approx(1.037, abs=1e-10)

    def test_pareto_ratio(self, scales):
        pl = PowerLawParams(mu_l=1.0, mu_y=1.0)
        ratio = marginal_pdf_L(2.0 * scales.l0, pl, scales) / marginal_pdf_L(
            scales.l0, pl, scales
        )
        assert ratio == pytest.approx(2.0**-2, rel=1e-12)

    def test_pareto_normalization(self, scales):
        pl = PowerLawParams(mu_l=1.5, mu_y=2.0)
        ls = np.exp(np.linspace(0.0, 25.0, 20001)) * scales.l0
        total = np.trapezoid(marginal_pdf_L(ls, pl, scales) * ls, np.log(ls / scales.l0))
        assert total == pytest.approx(1.0, abs=1e-4)
        assert marginal_pdf_L(0.5 * scales.l0, pl, scales) == 0.0

    def test_marginal_matches_numeric_integration(self, paper_params, scales):
        g = to_gaussian(paper_params)
        sd_cond = math.sqrt(g.var_y_given_l)
        for l in (-2.0, 0.0, 1.5):
            labor = scales.l0 * math.exp(l)
            mu = g.mu_y + paper_params.alpha * (l - g.mu_l)
            ys = np.linspace(mu - 10 * sd_cond, mu + 10 * sd_cond, 4001)
            sales = scales.y0 * np.exp(ys)
            integral = np.trapezoid(joint_pdf(sales, labor, paper_params, scales) * sales, ys)
            closed = marginal_pdf_L(labor, paper_params, scales)
            assert integral == pytest.approx(closed, rel=1e-6)

    def test_marginal_integrates_to_one(self, paper_params, scales):
        g = to_gaussian(paper_params)
        for pdf, mu, var, scale in (
            (marginal_pdf_L, g.mu_l, g.sig_ll, scales.l0),
            (marginal_pdf_Y, g.mu_y, g.sig_yy, scales.y0),
            (marginal_pdf_C, g.mu_c, g.var_c, scales.c0),
        ):
            xs = log_grid(mu, math.sqrt(var), 8.0, 2001)
            raw = scale * np.exp(xs)
            assert np.trapezoid(pdf(raw, paper_params, scales) * raw, xs) == pytest.approx(
                1.0, abs=1e-6
            )

    def test_rejects_nonpositive_argument(self, paper_params):
        with pytest.raises(DomainError):
            marginal_pdf_L(0.0, paper_params)


class TestScalingFunctions:
    def test_phi_y_log_curvature(self, paper_params, scales):
        # second difference of ln Phi_Y at +-1 natural log = -2*beta*p
        vals = [
            math.log(scaling_function_Y(scales.y0 * math.exp(x), paper_params, scales))
            for x in (-1.0, 0.0, 1.0)
        ]
        assert vals[0] + vals[2] - 2 * vals[1] == pytest.approx(-2.0 * 0.45719, abs=1e-10)

    def test_phi_l_log_curvature(self, paper_params, scales):
        vals = [
            math.log(scaling_function_L(scales.l0 * math.exp(x), paper_params, scales))
            for x in (-1.0, 0.0, 1.0)
        ]
        assert vals[0] + vals[2] - 2 * vals[1] == pytest.approx(
            -2.0 * paper_params.alpha * paper_params.p, rel=1e-10
        )

    def test_zero_tilt_makes_phi_y_even(self, scales):
        # q = 0: Phi_Y(Y0*e^x) = Phi_Y(Y0*e^-x); the 1/u Jacobian cancels the
        # lognormal mean shift exactly
        params = DslParams(1.037, 0.655, 0.698, q=0.0)
        for x in (0.5, 1.0, 2.0):
            up = scaling_function_Y(scales.y0 * math.exp(x), params, scales)
            dn = scaling_function_Y(scales.y0 * math.exp(-x), params, scales)
            assert up == pytest.approx(dn, rel=1e-12)

    def test_unit_integral(self, paper_params, scales):
        xs = np.linspace(-10, 10, 4001)
        u = scales.y0 * np.exp(xs)
        total = np.trapezoid(scaling_function_Y(u, paper_params, scales) * u, xs)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_fitted_curvature_close_to_replication_value(self):
        # the curvature the family assigns to Phi_Y at the replication fit
        # p = 0.692 +- 0.027 is compatible with the headline -beta*p
        assert abs(0.655 * 0.692 - 0.45719) <= 0.655 * 0.027


class TestConditionals:
    def test_normalized_in_first_argument(self, paper_params, scales):
        g = to_gaussian(paper_params)
        sd = math.sqrt(g.var_y_given_l)
        labor = scales.l0 * math.exp(1.2)
        mu = g.mu_y + paper_params.alpha * (1.2 - g.mu_l)
        ys = np.linspace(mu - 10 * sd, mu + 10 * sd, 3001)
        sales = scales.y0 * np.exp(ys)
        total = np.trapezoid(
            conditional_pdf_Y_given_L(sales, labor, paper_params, scales) * sales, ys
        )
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_agrees_with_gaussian_conditional(self, paper_params, scales):
        # dual route: scaling-law composition vs the Gaussian conditional
        # with the 1/Y Jacobian
        g = to_gaussian(paper_params)
        var = g.var_y_given_l
        for l in (-1.0, 0.0, 2.0):
            labor = scales.l0 * math.exp(l)
            mu = g.mu_y + paper_params.alpha * (l - g.mu_l)
            for y in (mu - 2.0, mu, mu + 1.0):
                sales = scales.y0 * math.exp(y)
                gauss = math.exp(-0.5 * (y - mu) ** 2 / var) / math.sqrt(2 * math.pi * var) / sales
                assert conditional_pdf_Y_given_L(sales, labor, paper_params, scales) == pytest.approx(
                    gauss, rel=1e-10
                )

    def test_mirror_agrees_with_gaussian_conditional(self, paper_params, scales):
        g = to_gaussian(paper_params)
        var = g.var_l_given_y
        y = 0.8
        sales = scales.y0 * math.exp(y)
        mu = g.mu_l + paper_params.beta * (y - g.mu_y)
        for l in (mu - 1.5, mu + 0.5):
            labor = scales.l0 * math.exp(l)
            gauss = math.exp(-0.5 * (l - mu) ** 2 / var) / math.sqrt(2 * math.pi * var) / labor
            assert conditional_pdf_L_given_Y(labor, sales, paper_params, scales) == pytest.approx(
                gauss, rel=1e-10
            )

    def test_reduces_to_phi_at_reference_scale(self, paper_params, scales):
        sales = scales.y0 * np.exp(np.linspace(-2, 2, 9))
        np.testing.assert_allclose(
            conditional_pdf_Y_given_L(sales, scales.l0, paper_params, scales),
            scaling_function_Y(sales, paper_params, scales),
            rtol=1e-12,
        )

    def test_conditional_mean_slope_is_alpha(self, paper_params, scales):
        # quadrature for E(y|l) at two conditioning points
        g = to_gaussian(paper_params)
        sd = math.sqrt(g.var_y_given_l)

        def cond_mean(l):
            mu = g.mu_y + paper_params.alpha * (l - g.mu_l)
            ys = np.linspace(mu - 10 * sd, mu + 10 * sd, 3001)
            sales = scales.y0 * np.exp(ys)
            f = conditional_pdf_Y_given_L(sales, scales.l0 * math.exp(l), paper_params, scales)
            return np.trapezoid(ys * f * sales, ys)

        slope = (cond_mean(1.0) - cond_mean(-1.0)) / 2.0
        assert slope == pytest.approx(paper_params.alpha, abs=1e-6)

    def test_conditional_variance_value(self, paper_params):
        g = to_gaussian(paper_params)
        assert g.var_y_given_l == pytest.approx(1.0936, abs=5e-4)

    def test_decomposition_identity(self, paper_params, scales):
        # joint = conditional * marginal, both orientations, on a 20x20 grid
        g = to_gaussian(paper_params)
        ys = log_grid(g.mu_y, math.sqrt(g.sig_yy), 3.0, 20)
        ls = log_grid(g.mu_l, math.sqrt(g.sig_ll), 3.0, 20)
        sales = scales.y0 * np.exp(ys)[:, None]
        labor = scales.l0 * np.exp(ls)[None, :]
        joint = joint_pdf(sales, labor, paper_params, scales)
        via_l = conditional_pdf_Y_given_L(sales, labor, paper_params, scales) * marginal_pdf_L(
            labor, paper_params, scales
        )
        via_y = conditional_pdf_L_given_Y(labor, sales, paper_params, scales) * marginal_pdf_Y(
            sales, paper_params, scales
        )
        np.testing.assert_allclose(joint, via_l, rtol=1e-10)
        np.testing.assert_allclose(joint, via_y, rtol=1e-10)


class TestProductivity:
    def test_joint_integrates_to_one(self, paper_params, scales):
        g = to_gaussian(paper_params)
        cs = log_grid(g.mu_c, math.sqrt(g.var_c))
        ls = log_grid(g.mu_l, math.sqrt(g.sig_ll))
        prod = scales.c0 * np.exp(cs)
        labor = scales.l0 * np.exp(ls)
        f = productivity_joint_pdf(prod[:, None], labor[None, :], paper_params, scales)
        total = trapezoid_2d(f * prod[:, None] * labor[None, :], cs, ls)
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_reference_point_substitution(self, paper_params, scales):
        assert productivity_joint_pdf(scales.c0, scales.l0, paper_params, scales) == pytest.approx(
            scales.l0 * joint_pdf(scales.y0, scales.l0, paper_params, scales), rel=1e-12
        )

    def test_log_curvature_in_c_matches_var_c(self, paper_params, scales):
        # marginal of c: second difference of its log equals -1/var(c)
        g = to_gaussian(paper_params)
        vals = [
            math.log(marginal_pdf_C(scales.c0 * math.exp(g.mu_c + x), paper_params, scales))
            for x in (-1.0, 0.0, 1.0)
        ]
        assert vals[0] + vals[2] - 2 * vals[1] == pytest.approx(-1.0 / g.var_c, rel=1e-10)
        assert g.var_c == pytest.approx(
            g.sig_yy + g.sig_ll - 2.0 * g.sig_ly, rel=1e-12
        )

    def test_expected_labor_slope(self, paper_params, scales):
        # exact log-log slope of E(L|C) is beta_t
        pp = derive_productivity(paper_params)
        hi = expected_L_given_C(scales.c0 * math.e, paper_params, scales)
        lo = expected_L_given_C(scales.c0, paper_params, scales)
        assert math.log(hi / lo) == pytest.approx(pp.beta_t, rel=1e-12)
        assert expected_L_given_C_slope(paper_params) == pytest.approx(0.072662129344, abs=1e-9)
        assert abs(expected_L_given_C_slope(paper_params) - 0.072) <= 0.007

    def test_slope_vanishes_as_alpha_approaches_one(self):
        slope = expected_L_given_C_slope(DslParams(1.0 + 1e-6, 0.655, 0.698))
        assert abs(slope) < 1e-5

    def test_slope_equals_cov_over_var(self, paper_params):
        g = to_gaussian(paper_params)
        assert expected_L_given_C_slope(paper_params) == pytest.approx(
            g.cov_lc / g.var_c, rel=1e-10
        )

    def test_psi_l_conditional_normalized(self, paper_params, scales):
        g = to_gaussian(paper_params)
        sd = math.sqrt(g.var_l_given_c)
        pp = derive_productivity(paper_params)
        for c in (-1.0, 0.0, 2.0):
            prod = scales.c0 * math.exp(c)
            mu = g.mu_l + pp.beta_t * (c - g.mu_c)
            ls = np.linspace(mu - 10 * sd, mu + 10 * sd, 3001)
            labor = scales.l0 * np.exp(ls)
            total = np.trapezoid(
                conditional_pdf_L_given_C(labor, prod, paper_params, scales) * labor, ls
            )
            assert total == pytest.approx(1.0, abs=1e-6)

    def test_conditional_reduces_to_psi_at_reference(self, paper_params, scales):
        labor = scales.l0 * np.exp(np.linspace(-1, 1, 7))
        np.testing.assert_allclose(
            conditional_pdf_L_given_C(labor, scales.c0, paper_params, scales),
            psi_L(labor, paper_params, scales),
            rtol=1e-12,
        )

    def test_psi_log_curvature_and_variance(self, paper_params, scales):
        # curvature of the log of u*psi_L(u) is -1/var(l|c) with
        # var(l|c) = 1/(2*(alpha+beta-2*alpha*beta)*p) = 2.147730
        g = to_gaussian(paper_params)
        assert g.var_l_given_c == pytest.approx(2.147729973986, abs=1e-9)
        a, b, p = paper_params.alpha, paper_params.beta, paper_params.p
        assert g.var_l_given_c == pytest.approx(
            1.0 / (2.0 * (a + b - 2 * a * b) * p), rel=1e-12
        )
        vals = [
            math.log(psi_L(scales.l0 * math.exp(x), paper_params, scales) * scales.l0 * math.exp(x))
            for x in (-1.0, 0.0, 1.0)
        ]
        assert vals[0] + vals[2] - 2 * vals[1] == pytest.approx(-1.0 / g.var_l_given_c, rel=1e-10)

    def test_productivity_joint_is_lognormal_with_tilde_exponents(self, paper_params, scales):
        # log of the raw joint in (C, L) relative to the reference point has
        # the same quadratic structure with (alpha_t, beta_t, p_t)
        pp = derive_productivity(paper_params)
        f0 = productivity_joint_pdf(scales.c0, scales.l0, paper_params, scales)
        for c, l in ((0.6, -0.4), (-1.1, 0.9)):
            val = productivity_joint_pdf(
                scales.c0 * math.exp(c), scales.l0 * math.exp(l), paper_params, scales
            )
            expected = (
                -pp.alpha_t * pp.p_t * l * l
                + 2.0 * pp.alpha_t * pp.beta_t * pp.p_t * l * c
                - pp.beta_t * pp.p_t * c * c
                + (paper_params.s + paper_params.q + 1.0) * l
                + paper_params.q * c
            )
            assert math.log(val / f0) == pytest.approx(expected, abs=1e-10)
