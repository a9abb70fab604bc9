from __future__ import annotations

import pytest

from spectral_rec import Q
from spectral_rec.curve import build_curve
from spectral_rec.errors import (
    BadSampleError,
    LogarithmicTermError,
    NormalizationError,
    UnsupportedOperationError,
)
from spectral_rec.expressions import parse_expression as expr
from spectral_rec.free_energy import (
    FreeEnergy,
    FreeEnergyTable,
    df_via_differential_recursion,
    diagonal_specialize,
    integrate_correlator,
    verify_free_energies,
)
from spectral_rec.recursion import Correlator, CorrelatorTable


def terms_of(fe):
    return {tuple((str(q), k) for q, k in key): v for key, v in fe.terms.items()}


class TestIntegration:
    def test_airy_f11(self, airy_tables):
        _, ftable = airy_tables
        assert terms_of(ftable.f(1, 1)) == {(("0", 3),): Q(1, 48)}

    def test_airy_f03(self, airy_tables):
        _, ftable = airy_tables
        assert terms_of(ftable.f(0, 3)) == {(("0", 1), ("0", 1), ("0", 1)): Q(1, 2)}

    def test_rederivation_reproduces_correlator(self, curve_b_tables):
        table, ftable = curve_b_tables
        for (g, n), fe in ftable.entries.items():
            rebuilt = {}
            for key, c in fe.terms.items():
                factor = Q(1)
                new_key = []
                for q, k in key:
                    factor *= -k
                    new_key.append((q, k + 1))
                rebuilt[tuple(sorted(new_key, key=lambda idx: ((1 if str(idx[0]) == "inf" else 0, idx[1]))))] = (
                    c * factor
                )
            # compare as sets of (sorted key, value)
            got = {
                (tuple(sorted((str(q), k) for q, k in key)), v)
                for key, v in table.w(g, n).terms.items()
            }
            have = {
                (tuple(sorted((str(q), k) for q, k in key)), v)
                for key, v in rebuilt.items()
            }
            assert got == have

    def test_simple_pole_rejected(self, airy):
        corr = Correlator(1, 1, {((Q(0), 1),): Q(1)})
        with pytest.raises(LogarithmicTermError):
            integrate_correlator(airy, corr)

    def test_even_shift_rejected_by_normalization(self, airy):
        # an even, sheet-symmetric candidate violates the fiber-sum condition
        corr = Correlator(1, 1, {((Q(0), 3),): Q(1)})  # integrates to even 1/z^2
        with pytest.raises(NormalizationError):
            integrate_correlator(airy, corr)

    def test_02_potential_refused(self, airy_tables):
        _, ftable = airy_tables
        with pytest.raises(UnsupportedOperationError):
            ftable.f(0, 2)

    def test_involution_moving_infinity_is_refused(self):
        # sigma(z) = 1/z moves infinity: its pullbacks carry constant parts,
        # so the normalized potential leaves the pole-basis representation.
        # The recursion layer itself handles the curve; integration refuses.
        from spectral_rec import EXACT, build_curve

        c = build_curve(expr("z + 1/z"), expr("z - 1/z"), EXACT)
        table = CorrelatorTable(c)
        table.fill(1)  # the residue layer works, with both points at +-1
        assert set(table.entries) == {(0, 3), (1, 1)}
        with pytest.raises(NormalizationError, match="reparametrize"):
            FreeEnergyTable(c).fill_from(table)


class TestDiagonal:
    def test_f03_diagonal(self, airy_tables):
        _, ftable = airy_tables
        assert diagonal_specialize(ftable.f(0, 3)) == expr("1/(2*z^3)")

    def test_f11_diagonal(self, airy_tables):
        _, ftable = airy_tables
        assert diagonal_specialize(ftable.f(1, 1)) == expr("1/(48*z^3)")

    def test_first_derivative_rule(self, airy_tables):
        _, ftable = airy_tables
        f03 = ftable.f(0, 3)
        # d/dz of the diagonal equals the n [d_u F] rule
        assert diagonal_specialize(f03, 1) == diagonal_specialize(f03, 0).derivative()
        assert diagonal_specialize(f03, 1) == expr("-3/(2*z^4)")

    @pytest.mark.parametrize("gn", [(0, 3), (0, 4), (1, 2)])
    def test_second_derivative_rule(self, curve_b_tables, gn):
        # d^2/dz^2 F(z..z) = n [d_u^2 F]| + n(n-1) [d_u1 d_u2 F]|
        _, ftable = curve_b_tables
        fe = ftable.f(*gn)
        n = fe.n
        lhs = diagonal_specialize(fe, 0).derivative().derivative()
        mixed = diagonal_specialize(fe, 2)
        # same-slot part: direct tensor computation
        from spectral_rec.algebra import RationalFunction
        from spectral_rec.free_energy import _basis_rf

        same = RationalFunction.zero()
        for okey, c in fe.ordered_entries():
            prod = RationalFunction.const(c)
            for s, (q, k) in enumerate(okey):
                base = _basis_rf(q, k)
                prod = prod * (base.derivative().derivative() if s == 0 else base)
            same = same + prod
        assert lhs == n * same + mixed

    def test_diagonal_pole_orders(self, curve_b_tables, curve_b):
        _, ftable = curve_b_tables
        for (g, n), fe in ftable.entries.items():
            diag = diagonal_specialize(fe)
            for p in curve_b.active_points():
                assert -diag.order_at(p) == 6 * g - 6 + 3 * n


class TestCrossPath:
    def test_level_one_sample(self, airy_tables, airy):
        _, ftable = airy_tables
        val = df_via_differential_recursion(airy, ftable, 1, 1, (Q(3),))
        assert val == Q(-1, 16 * 81)

    def test_04_at_spec_sample(self, airy_tables, airy):
        _, ftable = airy_tables
        sample = (Q(2), Q(3), Q(5), Q(7))
        lhs = ftable.f(0, 4).partial_value(0, sample)
        rhs = df_via_differential_recursion(airy, ftable, 0, 4, sample)
        assert lhs == rhs

    def test_bad_sample_conjugate_pair(self, airy_tables, airy):
        _, ftable = airy_tables
        with pytest.raises(BadSampleError):
            df_via_differential_recursion(airy, ftable, 0, 4, (Q(2), Q(-2), Q(5), Q(7)))

    def test_bad_sample_ramification(self, airy_tables, airy):
        _, ftable = airy_tables
        with pytest.raises(BadSampleError):
            df_via_differential_recursion(airy, ftable, 0, 4, (Q(0), Q(3), Q(5), Q(7)))

    def test_03_has_no_recursion_side(self, airy_tables, airy):
        _, ftable = airy_tables
        with pytest.raises(UnsupportedOperationError):
            df_via_differential_recursion(airy, ftable, 0, 3, (Q(2), Q(3), Q(5)))

    def test_full_suite_both_curves(self, airy_tables, curve_b_tables, airy, curve_b):
        for curve, (table, ftable) in (
            (airy, airy_tables),
            (curve_b, curve_b_tables),
        ):
            done = verify_free_energies(ftable, table, samples=20)
            kinds = {name for _, _, name in done}
            assert "round-trip" in kinds
            assert "differential-recursion" in kinds
            assert "diagonal-pole-order" in kinds
