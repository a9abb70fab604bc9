from __future__ import annotations

import pytest

from spectral_rec import EXACT, Q
from spectral_rec.algebra import RationalFunction, series_expand
from spectral_rec.curve import build_curve
from spectral_rec.errors import (
    BadSampleError,
    BadSheetError,
    IncompleteTableError,
    NotASpectralCurveError,
    QuantizationFailureError,
)
from spectral_rec.expressions import parse_expression as expr
from spectral_rec.free_energy import FreeEnergyTable
from spectral_rec.recursion import CorrelatorTable
from spectral_rec.wkb import (
    WKBExpansion,
    build_wkb_expansion,
    d_by_dx,
    leading_wkb_forms,
    ode_series_oracle,
    rational_preimage,
    schrodinger_potential,
    verify_schrodinger,
    wkb_term_from_free_energies,
    wkb_term_recursion_step,
    xchart_series,
)


class TestPotential:
    def test_airy(self, airy):
        assert schrodinger_potential(airy) == expr("-x", variable="x")

    def test_curve_b(self, curve_b):
        assert schrodinger_potential(curve_b) == expr("x - x^2", variable="x")

    def test_cubic_fiber(self):
        c = build_curve(expr("z^2"), expr("z^3"), EXACT)
        assert schrodinger_potential(c) == expr("-x^3", variable="x")

    def test_identity_on_curve(self, curve_b):
        pot = schrodinger_potential(curve_b)
        assert pot.compose_rf(curve_b.x) == -(curve_b.y * curve_b.y)


class TestLeadingForms:
    def test_airy(self, airy):
        ds0, ds1 = leading_wkb_forms(airy)
        assert ds0.fn == expr("2*z^2")
        assert ds1.fn == expr("-1/(2*z)")

    def test_consistency_at_sample(self, curve_b):
        # the first-order relation holds pointwise in the base chart
        ds0, ds1 = leading_wkb_forms(curve_b)
        y = curve_b.y
        combo = d_by_dx(curve_b, y) + 2 * y * (ds1.fn / curve_b.x.derivative())
        assert combo.is_zero()
        for z0 in (Q(2), Q(1, 3), Q(-5)):
            assert combo.evaluate(z0) == 0

    def test_exp_s1_is_inverse_sqrt_of_y(self, airy):
        # ds1 = -1/2 dy/y integrates to -1/2 log y
        _, ds1 = leading_wkb_forms(airy)
        y = airy.y
        assert ds1.fn == -Q(1, 2) * y.derivative() / y


class TestTerms:
    def test_airy_s2(self, airy, airy_tables):
        _, ftable = airy_tables
        assert wkb_term_from_free_energies(ftable, 2) == expr("5/(48*z^3)")

    def test_airy_s3_both_paths(self, airy, airy_tables):
        _, ftable = airy_tables
        s3 = wkb_term_from_free_energies(ftable, 3)
        assert s3 == expr("5/(64*z^6)")
        s2 = wkb_term_from_free_energies(ftable, 2)
        assert wkb_term_recursion_step(airy, {2: s2}, 2) == s3

    def test_recursion_intermediate_value(self, airy, airy_tables):
        # the step derivative for the airy curve: -15/(32 z^7)
        _, ftable = airy_tables
        s2 = wkb_term_from_free_energies(ftable, 2)
        s3 = wkb_term_recursion_step(airy, {2: s2}, 2)
        assert s3.derivative() == expr("-15/(32*z^7)")

    def test_zero_seed_stays_zero(self, airy):
        z = RationalFunction.zero()
        out = wkb_term_recursion_step(airy, {2: z}, 2)
        assert out.is_zero()

    def test_pole_orders(self, airy, airy_tables):
        _, ftable = airy_tables
        exp = build_wkb_expansion(airy, ftable, 6)
        for m in range(2, 7):
            assert -exp.term(m).order_at(Q(0)) == 3 * m - 3

    def test_sheet_parity(self, curve_b, curve_b_tables):
        from spectral_rec.algebra import compose_rf_mobius

        _, ftable = curve_b_tables
        exp = build_wkb_expansion(curve_b, ftable, 5)
        for m in range(2, 6):
            sm = exp.term(m)
            pulled = compose_rf_mobius(sm, curve_b.involution)
            assert pulled == (sm if (m + 1) % 2 == 0 else -sm)

    def test_missing_table(self, airy):
        empty = FreeEnergyTable(airy)
        with pytest.raises(IncompleteTableError):
            wkb_term_from_free_energies(empty, 2)


class TestSchrodinger:
    def test_airy_residuals_vanish(self, airy, airy_tables):
        _, ftable = airy_tables
        exp = build_wkb_expansion(airy, ftable, 6)
        report = verify_schrodinger(exp, 6)
        assert report.ok and report.verified_through == 6
        assert report.residuals[0].is_zero()  # the defining curve equation
        assert report.residuals[1].is_zero()  # the first-order consistency

    def test_curve_b_residuals_vanish(self, curve_b, curve_b_tables):
        _, ftable = curve_b_tables
        exp = build_wkb_expansion(curve_b, ftable, 6)
        report = verify_schrodinger(exp, 6)
        assert report.ok and report.verified_through == 6

    def test_semiclassical_term_structure(self, airy):
        # the zeroth residual is y^2 + potential(x) by construction
        pot = schrodinger_potential(airy)
        assert (airy.y * airy.y + pot.compose_rf(airy.x)).is_zero()

    def test_perturbation_detected(self, airy, airy_tables):
        _, ftable = airy_tables
        exp = build_wkb_expansion(airy, ftable, 4)
        tampered = dict(exp.terms)
        tampered[2] = tampered[2] + expr("1/(1000 * z^3)")
        bad = WKBExpansion(airy, exp.ds0, exp.ds1, tampered, exp.order)
        with pytest.raises(QuantizationFailureError) as err:
            verify_schrodinger(bad, 4)
        assert err.value.order == 2  # the tampered term enters at order 2


class TestClassicalAsymptotics:
    def test_model_exponential_series_coefficients(self, airy, airy_tables):
        # Re-assembled as exp(sum_m h^(m-1) S_m), the expansion terms of the
        # x = z^2, y = z model must reproduce the classical asymptotic-series
        # coefficients u_k of the second-order model equation (tabulated in
        # the standard special-function references), with u_k attached to
        # zeta^-k for zeta = (2/3) z^3:
        #   u_1 = 5/72,  u_2 = 385/10368,  u_3 = 85085/2239488.
        _, ftable = airy_tables
        exp = build_wkb_expansion(airy, ftable, 4)
        s2, s3, s4 = exp.term(2), exp.term(3), exp.term(4)
        z = Q(2)  # any regular rational point
        zeta = Q(2, 3) * z**3
        u = {1: Q(5, 72), 2: Q(385, 10368), 3: Q(85085, 2239488)}
        k1 = s2.evaluate(z)
        k2 = s3.evaluate(z) + s2.evaluate(z) ** 2 / 2
        k3 = (
            s4.evaluate(z)
            + s2.evaluate(z) * s3.evaluate(z)
            + s2.evaluate(z) ** 3 / 6
        )
        assert k1 == u[1] / zeta
        assert k2 == u[2] / zeta**2
        assert k3 == u[3] / zeta**3


class TestOracle:
    def test_airy_series_values(self, airy):
        pot = schrodinger_potential(airy)
        oracle = ode_series_oracle(pot, 1, 1, 6, 4)
        # first-order term: -1/(4x) around 1
        assert oracle[1].coeff(0) == Q(-1, 4)
        assert oracle[1].coeff(1) == Q(1, 4)
        # second-order term: -5/(32 x^(5/2)) around 1
        assert oracle[2].coeff(0) == Q(-5, 32)
        assert oracle[2].coeff(1) == Q(-5, 32) * Q(-5, 2)

    def test_bad_sheet(self, airy):
        pot = schrodinger_potential(airy)
        with pytest.raises(BadSheetError):
            ode_series_oracle(pot, 1, 2, 6, 3)

    def test_caustic_rejected(self, airy):
        pot = schrodinger_potential(airy)
        with pytest.raises(BadSampleError):
            ode_series_oracle(pot, 0, 0, 6, 3)

    @pytest.mark.parametrize("depth", [8, 12])
    def test_matches_engine_on_airy(self, airy, airy_tables, depth):
        _, ftable = airy_tables
        exp = build_wkb_expansion(airy, ftable, 4)
        pot = schrodinger_potential(airy)
        oracle = ode_series_oracle(pot, 1, 1, depth, 4)
        z0 = rational_preimage(airy, 1, 1)
        for m in range(2, 5):
            eng = xchart_series(airy, d_by_dx(airy, exp.term(m)), 1, z0, depth)
            assert eng.equal_window(oracle[m].truncate(depth))

    def test_matches_engine_on_curve_b(self, curve_b, curve_b_tables):
        _, ftable = curve_b_tables
        exp = build_wkb_expansion(curve_b, ftable, 4)
        pot = schrodinger_potential(curve_b)
        x0, y0 = Q(9, 8), Q(3, 8)
        z0 = rational_preimage(curve_b, x0, y0)
        assert z0 == Q(1, 3)
        oracle = ode_series_oracle(pot, x0, y0, 12, 4)
        for m in range(2, 5):
            eng = xchart_series(curve_b, d_by_dx(curve_b, exp.term(m)), x0, z0, 12)
            assert eng.equal_window(oracle[m].truncate(12))

    def test_preimage_requires_matching_sheet(self, curve_b):
        with pytest.raises(BadSheetError):
            rational_preimage(curve_b, Q(9, 8), Q(-5, 8))
