from __future__ import annotations

import pytest

from spectral_rec import EXACT, INF, Q, SERIES
from spectral_rec.algebra import (
    Mobius,
    Polynomial,
    RationalFunction,
    compose_rf_mobius,
    residue_at,
    series_expand,
)
from spectral_rec.curve import (
    RecursionKernel,
    bergman_sigma_diagonal,
    bergman_value,
    build_curve,
    cauchy_kernel,
    recursion_kernel,
)
from spectral_rec.errors import (
    DegenerateCurveError,
    MalformedInputError,
    ModeError,
    UnexpectedPoleError,
    UnsupportedCurveError,
)
from spectral_rec.expressions import parse_expression as expr

P = Polynomial
RF = RationalFunction


class TestBuildCurve:
    def test_airy(self, airy):
        assert airy.involution is not None
        assert airy.involution.apply(Q(5)) == -5
        assert airy.ydx.fn == expr("2*z^2")
        locs = [(str(r.location), r.active) for r in airy.ram_points]
        assert ("0", True) in locs and ("inf", False) in locs
        assert airy.active_points() == [Q(0)]

    def test_curve_b(self, curve_b):
        assert curve_b.involution.apply(Q(5)) == -5
        assert curve_b.ydx.fn == expr("2*z^2/(1-z^2)^3")
        # both sheets collide above the finite base point x = 0, so the
        # point at infinity is a genuine active ramification point
        actives = curve_b.active_points()
        assert actives[0] == Q(0) and actives[1] is INF

    def test_series_cubic(self):
        c = build_curve(expr("z^3 - 3*z"), expr("z"), SERIES, 8)
        locs = sorted((str(r.location), r.active, r.form_order) for r in c.ram_points)
        # y dx vanishes only to first order: both points stay inactive
        assert locs == [("-1", False, 1), ("1", False, 1)]
        sig = c.ram_points[0].involution
        assert sig.coeff(1) == -1

    def test_exact_needs_degree_2(self):
        with pytest.raises(ModeError):
            build_curve(expr("z^3 - 3*z"), expr("z"), EXACT)

    def test_irrational_ramification_rejected(self):
        with pytest.raises(UnsupportedCurveError):
            build_curve(expr("z + 2/z"), expr("z - 2/z"), EXACT)

    def test_anti_invariance_required(self):
        # y = z^2 is invariant (not anti-invariant) under z -> -z
        with pytest.raises(UnsupportedCurveError):
            build_curve(expr("z^2"), expr("z^2"), EXACT)

    def test_constant_x_rejected(self):
        with pytest.raises(MalformedInputError):
            build_curve(expr("3"), expr("z"), EXACT)

    def test_series_mode_rejects_infinite_ramification(self):
        with pytest.raises(ModeError):
            build_curve(expr("1/(1-z^2)"), expr("z/(1-z^2)"), SERIES)

    def test_stray_zeros_rejected(self):
        # y dx vanishing away from the ramification points breaks the
        # contour calculus; both irrational and rational stray zeros
        with pytest.raises(UnsupportedCurveError, match="irrational zeros"):
            build_curve(expr("z^2"), expr("z*(1 + z^2/4)"), EXACT)
        with pytest.raises(UnsupportedCurveError, match="not a ramification point"):
            build_curve(expr("z^2"), expr("z*(1 - z^2/4)"), EXACT)

    def test_higher_order_vanishing_marks_inactive(self):
        c = build_curve(expr("z^2"), expr("z^3"), EXACT)
        ram = c.ram_point(Q(0))
        assert not ram.active and ram.form_order == 4
        assert c.active_points() == []
        with pytest.raises(DegenerateCurveError):
            from spectral_rec.recursion import compute_w11

            compute_w11(c)

    def test_involution_is_involution(self, airy, curve_b):
        for curve in (airy, curve_b):
            assert curve.involution.is_involution()
            # y dx is anti-invariant: h(sigma(z)) sigma'(z) = -h(z)
            sig = curve.involution
            pulled = compose_rf_mobius(curve.ydx.fn, sig) * sig.derivative_rf()
            assert pulled == -curve.ydx.fn

    def test_h_is_sheet_symmetric(self, airy, curve_b):
        # the coefficient of y dx composed with the involution equals itself
        # up to the dz transformation, i.e. h(sigma(z)) = h(z) for sigma = -z
        for curve in (airy, curve_b):
            sig = curve.involution
            assert compose_rf_mobius(curve.ydx.fn, sig) == curve.ydx.fn


class TestCauchyKernel:
    def test_residues(self):
        form = cauchy_kernel(1, -1)
        assert form.fn == expr("1/(z-1) - 1/(z+1)")
        assert residue_at(form.fn, 1) == 1
        assert residue_at(form.fn, -1) == -1

    def test_coincident_points(self):
        assert cauchy_kernel(2, 2).fn.is_zero()

    def test_derivative_reproduces_second_kind_kernel(self):
        # differentiating the kernel in its first endpoint gives the
        # second-kind kernel, independently of the second endpoint
        z0 = Q(5)
        for b in (Q(7), Q(-2)):
            # value at z0 as a rational function of the endpoint a
            in_a = RF(P.one(), P([z0, -1])) - RF.const(1 / (z0 - b))
            for a0 in (Q(2), Q(-3), Q(1, 2)):
                assert in_a.derivative().evaluate(a0) == bergman_value(a0, z0)


class TestBergman:
    def test_symmetry(self):
        assert bergman_value(3, 5) == bergman_value(5, 3)

    def test_diagonal_rejected(self):
        with pytest.raises(MalformedInputError):
            bergman_value(2, 2)

    def test_sigma_pullback_diagonal(self, airy):
        assert bergman_sigma_diagonal(airy) == expr("-1/(4*z^2)")

    def test_double_pole_with_unit_biresidue(self):
        # expand 1/(z1-z2)^2 in z1 around z2 = 3: leading coefficient 1 at order 2
        f = RF(P.one(), P([-3, 1]) ** 2)
        s = series_expand(f, 3, 0)
        assert s.coeff(-2) == 1


class TestRecursionKernel:
    def test_airy_closed_form(self, airy):
        kern = recursion_kernel(airy, Q(0))
        for zv, z1v in ((Q(3), Q(5)), (Q(2), Q(-7)), (Q(1, 2), Q(4))):
            expected = 1 / (2 * zv * (z1v**2 - zv**2))
            assert kern.value(zv, z1v) == expected

    def test_sheet_symmetry_as_forms(self, airy):
        # K(sigma(z), z1) d sigma(z) = K(z, z1) dz
        kern = recursion_kernel(airy, Q(0))
        sig = airy.involution
        zv, z1v = Q(3), Q(5)
        sprime = sig.derivative_rf().evaluate(zv)
        assert kern.value(sig.apply(zv), z1v) * sprime == kern.value(zv, z1v)

    def test_scaling_in_y(self, airy):
        doubled = build_curve(airy.x, airy.y * 2, EXACT)
        k1 = recursion_kernel(airy, Q(0)).value(3, 5)
        k2 = recursion_kernel(doubled, Q(0)).value(3, 5)
        assert k2 == k1 / 2

    def test_denominator(self, airy):
        kern = recursion_kernel(airy, Q(0))
        assert kern.denominator_rf() == -2 * airy.ydx.fn

    def test_inactive_point_rejected(self, airy):
        with pytest.raises(DegenerateCurveError):
            recursion_kernel(airy, INF)

    def test_denominator_series_order(self, curve_b):
        for p in curve_b.active_points():
            kern = recursion_kernel(curve_b, p)
            inv = kern.inverse_denominator_series(8)
            assert inv.leading_order() == -2


class TestProjection:
    def test_closed_form_projection_on_curve_b(self, curve_b):
        closed = bergman_sigma_diagonal(curve_b) / (2 * curve_b.ydx.fn)
        proj = curve_b.project_form(closed)
        assert proj == {
            (Q(0), 2): Q(3, 16),
            (Q(0), 4): Q(-1, 16),
            (INF, 2): Q(3, 16),
            (INF, 4): Q(-1, 16),
        }

    def test_unexpected_pole_detected(self, airy):
        junk = RF(P.one(), P([-1, 1]) ** 2)
        with pytest.raises(UnexpectedPoleError):
            airy.project_form(junk)

    def test_polynomial_part_needs_infinity(self, airy):
        with pytest.raises(UnexpectedPoleError):
            airy.project_form(expr("z^2"))

    def test_function_projection_roundtrip(self, curve_b):
        f = expr("1/z^3 - 3/(16*z) + z - 7*z^3")
        terms, const = curve_b.project_function(f)
        assert const == 0
        rebuilt = RF.zero()
        for (q, k), c in terms.items():
            rebuilt = rebuilt + RF.pole_basis(q, k) * c
        assert rebuilt == f

    def test_pullback_matrix_airy(self, airy):
        assert airy.form_pullback(Q(0), 4) == {(Q(0), 4): Q(-1)}
        assert airy.form_pullback(Q(0), 3) == {(Q(0), 3): Q(1)}
        terms, const = airy.function_pullback(Q(0), 3)
        assert terms == {(Q(0), 3): Q(-1)} and const == 0
