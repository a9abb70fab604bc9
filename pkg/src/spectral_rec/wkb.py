"""All-order WKB terms and the quantized operator check.

The principal specialization of the potentials assembles the formal series
exponent ``sum_m hbar^(m-1) S_m``; the engine keeps the two leading pieces
as differentials (the curve form, and ``-1/2 dy/y``) and every higher term
as an exact rational function of the parameter ``z``.

Three independent routes into the same data are implemented:

* ``wkb_term_from_free_energies`` -- the weighted diagonal sum of stored
  potentials (one term per stable (g, n) at the right level);
* ``wkb_term_recursion_step`` -- the closed differential recursion that
  steps order ``m`` to ``m + 1`` with no correlator input;
* ``ode_series_oracle`` -- a brute-force triangular solve of the
  Schroedinger coefficients as power series in the base coordinate.

``verify_schrodinger`` expands the quantized operator applied to the formal
solution and requires every coefficient to vanish identically as a rational
function -- the square root never appears because the parametrization
eliminates it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Optional

from ._rat import Q, QONE, QZERO, point_str, rat, rat_str
from .algebra import (
    LaurentSeries,
    Polynomial,
    RationalFunction,
    antiderivative,
    compose_rf_mobius,
    format_rational_function,
    rational_roots,
    series_expand,
)
from .curve import EXACT, OneForm, SpectralCurve
from .errors import (
    BadSampleError,
    BadSheetError,
    IncompleteTableError,
    InternalConsistencyError,
    InvariantViolationError,
    NotASpectralCurveError,
    QuantizationFailureError,
    WkbConsistencyError,
)
from .free_energy import FreeEnergyTable, diagonal_specialize
from .recursion import _sample_stream, stable_pairs

__all__ = [
    "WKBExpansion",
    "QuantumCurveReport",
    "schrodinger_potential",
    "leading_wkb_forms",
    "wkb_term_from_free_energies",
    "wkb_term_recursion_step",
    "build_wkb_expansion",
    "verify_schrodinger",
    "ode_series_oracle",
    "xchart_series",
    "rational_preimage",
]


# ---------------------------------------------------------------------------
# the quadratic coefficient of the operator
# ---------------------------------------------------------------------------


def _solve_nullspace(rows: list, ncols: int) -> Optional[list]:
    """One nonzero rational solution of a homogeneous linear system."""
    mat = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for rr in range(r, len(mat)):
            if mat[rr][c] != 0:
                pivot = rr
                break
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = QONE / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for rr in range(len(mat)):
            if rr != r and mat[rr][c] != 0:
                f = mat[rr][c]
                mat[rr] = [a - f * b for a, b in zip(mat[rr], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(ncols) if c not in pivots]
    if not free:
        return None
    sol = [QZERO] * ncols
    sol[free[0]] = QONE
    for rr, c in enumerate(pivots):
        sol[c] = -mat[rr][free[0]]
    return sol


def schrodinger_potential(curve: SpectralCurve) -> RationalFunction:
    """The coefficient q(x) with y^2 + q(x) = 0 on the curve.

    Found by exact linear algebra: q(x(z)) must equal -y(z)^2 as a rational
    identity, which pins q uniquely for a degree-2 base map.  The identity
    is re-verified symbolically and at a few rational samples.
    """
    curve._require_exact()
    x, y = curve.x, curve.y
    target = -(y * y)
    dmax = max(target.num.degree, target.den.degree) + 2
    p, q = x.num, x.den
    for d in range(0, dmax + 1):
        ppow = [p**k for k in range(d + 1)]
        qpow = [q**k for k in range(d + 1)]
        basis = [ppow[k] * qpow[d - k] for k in range(d + 1)]
        # unknowns a_0..a_d, b_0..b_d with  t * sum b_k basis_k = sum a_k basis_k
        lhs_parts = [target.num * b for b in basis]      # times b_k
        rhs_parts = [target.den * b for b in basis]      # times a_k
        deg = max(
            max((pp.degree for pp in lhs_parts), default=0),
            max((pp.degree for pp in rhs_parts), default=0),
        )
        rows = []
        for power in range(deg + 1):
            row = [-rp[power] for rp in rhs_parts] + [lp[power] for lp in lhs_parts]
            rows.append(row)
        sol = _solve_nullspace(rows, 2 * (d + 1))
        if sol is None:
            continue
        a_coeffs = sol[: d + 1]
        b_coeffs = sol[d + 1 :]
        bpoly = Polynomial(b_coeffs)
        apoly = Polynomial(a_coeffs)
        if bpoly.is_zero():
            continue
        result = RationalFunction(apoly, bpoly)
        if result.compose_rf(x) == target:
            _potential_sample_check(curve, result)
            return result
    raise NotASpectralCurveError("y^2 is not a rational function of the base map")


def _potential_sample_check(curve: SpectralCurve, pot: RationalFunction):
    for tup in _sample_stream(curve, seed=31, count=3, width=1):
        v = tup[0]
        try:
            xv = curve.x.evaluate(v)
            if pot.evaluate(xv) != -curve.y.evaluate(v) ** 2:
                raise NotASpectralCurveError(
                    f"potential identity fails at z = {rat_str(v)}"
                )
        except BadSampleError:
            continue


# ---------------------------------------------------------------------------
# leading terms and the x-chart derivative
# ---------------------------------------------------------------------------


def d_by_dx(curve: SpectralCurve, f: RationalFunction) -> RationalFunction:
    """Push the z-derivative to the base coordinate: (1/x'(z)) d/dz."""
    return f.derivative() / curve.x.derivative()


def leading_wkb_forms(curve: SpectralCurve, samples: int = 8):
    """The two leading exponent differentials (ds0, ds1).

    ds0 is the curve form itself; ds1 = -1/2 dy/y realizes the first-order
    consistency condition, which is verified in the base chart both as a
    rational identity and at sample points.
    """
    curve._require_exact()
    ds0 = curve.ydx
    y = curve.y
    ds1 = OneForm(-Q(1, 2) * y.derivative() / y)
    # consistency: (d/dx) y + 2 y * s1x = 0 with s1x = ds1/dx
    s1x = _sx_term(curve, 1, {})
    combo = d_by_dx(curve, y) + 2 * y * s1x
    if not combo.is_zero():
        raise WkbConsistencyError("first-order consistency condition fails identically")
    for tup in _sample_stream(curve, seed=55, count=samples, width=1):
        if combo.evaluate(tup[0]) != 0:
            raise WkbConsistencyError(
                f"first-order consistency condition fails at {rat_str(tup[0])}"
            )
    return ds0, ds1


def _sx_term(curve: SpectralCurve, m: int, terms: dict) -> RationalFunction:
    """d S_m / dx as a function of z (sheet fixed by the parametrization)."""
    if m == 0:
        return curve.y
    if m == 1:
        y = curve.y
        return -d_by_dx(curve, y) / (2 * y)
    return d_by_dx(curve, terms[m])


# ---------------------------------------------------------------------------
# higher terms: two construction paths
# ---------------------------------------------------------------------------


def wkb_term_from_free_energies(ftable: FreeEnergyTable, m: int) -> RationalFunction:
    """S_m as the 1/n!-weighted diagonal sum over level m - 1 potentials."""
    if m < 2:
        raise ValueError("terms below order 2 are kept as differentials")
    total = RationalFunction.zero()
    for g, n in stable_pairs(m - 1):
        if not ftable.has(g, n):
            raise IncompleteTableError(
                f"potential ({g},{n}) needed for WKB order {m} is missing"
            )
        total = total + diagonal_specialize(ftable.f(g, n), 0) * Q(1, factorial(n))
    return total


def wkb_term_recursion_step(
    curve: SpectralCurve, terms: dict, m: int
) -> RationalFunction:
    """S_{m+1} from S_2 .. S_m by the closed differential recursion.

    The derivative of the next term is
    ``-(1/(2h)) (S_m'' + sum_{a+b=m+1, a,b>=2} S_a' S_b') - (1/(2h))' S_m'``
    in the parameter chart with h dz the curve form; the antiderivative is
    taken with zero constants in the pole basis.
    """
    if m < 2:
        raise ValueError("the closed recursion starts at order 2")
    for a in range(2, m + 1):
        if a not in terms:
            raise IncompleteTableError(f"term {a} missing for the recursion step")
    h = curve.ydx.fn
    inv2h = 1 / (2 * h)
    sm_prime = terms[m].derivative()
    rhs = sm_prime.derivative()
    for a in range(2, m):
        b = m + 1 - a
        if b < 2 or b > m:
            continue
        rhs = rhs + terms[a].derivative() * terms[b].derivative()
    next_prime = -inv2h * rhs - inv2h.derivative() * sm_prime
    return antiderivative(next_prime)


@dataclass
class WKBExpansion:
    """Exponent data of the formal solution, truncated at ``order``."""

    curve: SpectralCurve
    ds0: OneForm
    ds1: OneForm
    terms: dict  # m (>= 2) -> RationalFunction in z
    order: int

    def term(self, m: int) -> RationalFunction:
        if m not in self.terms:
            raise IncompleteTableError(f"WKB term {m} not computed")
        return self.terms[m]


def build_wkb_expansion(
    curve: SpectralCurve,
    ftable: FreeEnergyTable,
    order: int,
    cross_check: bool = True,
) -> WKBExpansion:
    """All WKB terms through ``order``; both construction paths must agree.

    Terms whose level is covered by the potential table come from the
    diagonal sums; every term that can also be reached by the closed
    recursion is compared against it exactly.  Beyond the table the
    recursion extends the expansion on its own.  Pole orders (3m - 3 at
    every active point) and sheet parity are enforced.
    """
    if order < 2:
        raise ValueError("expansion order must be at least 2")
    ds0, ds1 = leading_wkb_forms(curve)
    max_level = ftable.max_level()
    terms: dict = {}
    for m in range(2, order + 1):
        from_fe = wkb_term_from_free_energies(ftable, m) if m - 1 <= max_level else None
        from_rec = (
            wkb_term_recursion_step(curve, terms, m - 1) if (m - 1) in terms else None
        )
        if from_fe is None and from_rec is None:
            raise IncompleteTableError(
                f"WKB order {m} is reachable neither from potentials nor recursion"
            )
        if cross_check and from_fe is not None and from_rec is not None:
            # The recursion pins the term only up to a constant (it is a
            # statement about derivatives); the diagonal sum may carry a
            # genuine constant from cross products between the two points
            # (e.g. (1/z) * z).  Everything beyond that constant must agree.
            delta = from_fe - from_rec
            if not delta.derivative().is_zero():
                raise InternalConsistencyError(
                    f"WKB term {m}: diagonal sum and closed recursion disagree"
                )
        terms[m] = from_fe if from_fe is not None else from_rec
        _check_term_shape(curve, m, terms[m])
    return WKBExpansion(curve, ds0, ds1, terms, order)


def _check_term_shape(curve: SpectralCurve, m: int, sm: RationalFunction):
    expected = 3 * m - 3
    for p in curve.active_points():
        got = -sm.order_at(p)
        if got != expected:
            raise InvariantViolationError(
                f"WKB term {m} has pole order {got} at {point_str(p)}, "
                f"expected {expected}"
            )
    if curve.mode == EXACT:
        pulled = compose_rf_mobius(sm, curve.involution)
        want = sm if (m + 1) % 2 == 0 else -sm
        if pulled != want:
            raise InvariantViolationError(
                f"WKB term {m} does not have sheet parity (-1)^(m+1)"
            )


# ---------------------------------------------------------------------------
# operator verification
# ---------------------------------------------------------------------------


@dataclass
class QuantumCurveReport:
    """Outcome of expanding the quantized operator on the formal solution."""

    potential: RationalFunction
    residuals: dict = field(default_factory=dict)  # hbar power -> RationalFunction
    verified_through: int = -1

    @property
    def ok(self) -> bool:
        return all(r.is_zero() for r in self.residuals.values())


def verify_schrodinger(expansion: WKBExpansion, order: Optional[int] = None) -> QuantumCurveReport:
    """Expand the conjugated operator identity through the given order.

    The coefficient of each power of the formal parameter is assembled in
    the parameter chart (all derivatives pushed through the base map) and
    must vanish identically; the zeroth coefficient is the defining curve
    equation, the first is the leading consistency condition.  A nonzero
    residual raises QuantizationFailureError naming the order.
    """
    curve = expansion.curve
    if order is None:
        order = expansion.order
    if order > expansion.order:
        raise IncompleteTableError(
            f"verification through {order} needs terms through {order}"
        )
    pot = schrodinger_potential(curve)
    pot_on_curve = pot.compose_rf(curve.x)
    sx: dict = {0: curve.y, 1: _sx_term(curve, 1, {})}
    for m in range(2, order + 1):
        sx[m] = d_by_dx(curve, expansion.term(m))
    report = QuantumCurveReport(potential=pot)
    for k in range(order + 1):
        if k == 0:
            resid = sx[0] * sx[0] + pot_on_curve
        else:
            resid = d_by_dx(curve, sx[k - 1])
            for a in range(0, k + 1):
                resid = resid + sx[a] * sx[k - a]
        report.residuals[k] = resid
        if not resid.is_zero():
            raise QuantizationFailureError(k, format_rational_function(resid))
        report.verified_through = k
    return report


# ---------------------------------------------------------------------------
# the independent series oracle in the base chart
# ---------------------------------------------------------------------------


def ode_series_oracle(potential: RationalFunction, x0, y0, depth: int, order: int) -> dict:
    """Triangular power-series solve of the operator coefficients at x0.

    Returns a map ``m -> series of dS_m/dx`` in powers of (x - x0), all
    coefficients exact.  The sheet is fixed by the rational pair (x0, y0)
    with ``y0^2 = -potential(x0)``; a wrong pair raises BadSheetError.
    This route never sees the spectral curve's parametrization, which makes
    it an independent check of the engine's expansion.
    """
    x0 = rat(x0)
    y0 = rat(y0)
    pot0 = potential.evaluate(x0)
    if pot0 == 0:
        raise BadSampleError("x0 must be a regular point (potential nonzero)")
    if y0 * y0 != -pot0:
        raise BadSheetError("y0^2 must equal -potential(x0) exactly")
    work = depth + 2 * order + 4
    minus_pot = series_expand(-potential, x0, work)
    if minus_pot.min_degree < 0:
        raise BadSampleError("x0 is a pole of the potential")
    s0p = minus_pot.sqrt(y0)
    out = {0: s0p}
    s0p_inv = s0p.inverse()
    out[1] = -Q(1, 2) * (s0p.derivative() * s0p_inv)
    for m in range(1, order):
        rhs = out[m].derivative()
        for a in range(1, m + 1):
            b = m + 1 - a
            if 1 <= b <= m:
                rhs = rhs + out[a] * out[b]
        out[m + 1] = -Q(1, 2) * (rhs * s0p_inv)
    return {m: ser.truncate(depth) for m, ser in out.items()}


def rational_preimage(curve: SpectralCurve, x0, y0):
    """The rational parameter value above (x0, y0), if one exists."""
    x0, y0 = rat(x0), rat(y0)
    poly = curve.x.num - x0 * curve.x.den
    if poly.is_zero():
        raise BadSampleError("x is constant; no isolated preimage")
    roots, _ = rational_roots(poly)
    for z0 in sorted(roots):
        if curve.x.den.evaluate(z0) == 0:
            continue
        if curve.y.den.evaluate(z0) != 0 and curve.y.evaluate(z0) == y0:
            return z0
    raise BadSheetError(
        f"no rational parameter value with x = {rat_str(x0)}, y = {rat_str(y0)}"
    )


def xchart_series(curve: SpectralCurve, f: RationalFunction, x0, z0, depth: int) -> LaurentSeries:
    """Expansion of f(z) in powers of (x - x0) along the sheet through z0.

    Inverts the base map around the regular point z0 by Newton iteration on
    truncated series (the local inverse z(x)), then composes.
    """
    x0, z0 = rat(x0), rat(z0)
    if curve.x.evaluate(z0) != x0:
        raise BadSampleError("z0 does not lie above x0")
    work = depth + 2
    xser = series_expand(curve.x, z0, work)
    if xser.coeff(0) != x0 or xser.coeff(1) == 0:
        raise BadSampleError("base map is critical at z0")
    big = LaurentSeries.make(x0, 1, [xser.coeff(k) for k in range(1, work)], work)
    bigd = LaurentSeries.make(
        x0, 0, [k * xser.coeff(k) for k in range(1, work)], work - 1
    )
    # Newton for u(t) with X(u) = t
    t = LaurentSeries.make(x0, 1, [QONE], work)
    u = LaurentSeries.make(x0, 1, [QONE / xser.coeff(1)], work)
    matched = 2
    while matched < work + 1:
        err = big.compose(u) - t
        du = bigd.compose(u)
        u = (u - err / du).truncate(work)
        matched *= 2
    fser = series_expand(f, z0, work)
    if fser.min_degree < 0:
        raise BadSampleError("f has a pole at z0")
    fpoly = LaurentSeries.make(x0, 0, [fser.coeff(k) for k in range(0, work)], work)
    return fpoly.compose(u).truncate(depth)
