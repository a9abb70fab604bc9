"""Spectral-curve geometry on the rational parameter line.

A curve is a pair of rational functions ``x(z)``, ``y(z)``.  The engine works
with the 1-form ``y dx = y(z) x'(z) dz``, the sheet involution of the
covering ``x``, and the ramification points.  A ramification point is
*active* when ``y dx`` vanishes there to order exactly 2; only active points
feed the residue recursion.

Two modes:

* ``exact`` -- ``x`` has degree 2 as a map of the projective line, so the
  sheet involution is a global Moebius map.  Its fixed points (possibly
  including the point at infinity) are the ramification points; they must be
  rational.
* ``series`` -- the involution is computed per ramification point as a
  truncated power series by Newton iteration; only finite ramification
  points are supported.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ._rat import INF, QONE, QZERO, point_sort_key, point_str, rat
from .algebra import (
    LaurentSeries,
    Mobius,
    Polynomial,
    RationalFunction,
    compose_rf_mobius,
    newton_local_inverse,
    partial_fractions,
    rational_roots,
    series_expand,
)
from .errors import (
    DegenerateCurveError,
    MalformedInputError,
    ModeError,
    UnexpectedPoleError,
    UnsupportedCurveError,
    UnsupportedRamificationError,
)

EXACT = "exact"
SERIES = "series"

DEFAULT_SERIES_ORDER = 16


@dataclass(frozen=True)
class OneForm:
    """A rational 1-form ``fn(z) dz`` in the global coordinate."""

    fn: RationalFunction

    def order_at(self, p) -> int:
        return self.fn.form_order_at(p)

    def evaluate(self, z0):
        """Coefficient with respect to dz at a rational point."""
        return self.fn.evaluate(z0)

    def __add__(self, other: "OneForm") -> "OneForm":
        return OneForm(self.fn + other.fn)

    def __neg__(self) -> "OneForm":
        return OneForm(-self.fn)

    def scaled(self, c) -> "OneForm":
        return OneForm(self.fn * rat(c))

    def is_zero(self) -> bool:
        return self.fn.is_zero()


@dataclass(frozen=True)
class RamificationPoint:
    """A simple critical point of x with its local sheet involution."""

    location: object  # rational or INF
    active: bool
    form_order: int
    involution: object  # Mobius (exact mode) or LaurentSeries (series mode)


class SpectralCurve:
    """Immutable bundle of curve data consumed by the recursion engine."""

    def __init__(self, x, y, mode, ram_points, involution, series_order, name=""):
        self.x: RationalFunction = x
        self.y: RationalFunction = y
        self.mode: str = mode
        self.ram_points: tuple = tuple(ram_points)
        self.involution: Optional[Mobius] = involution
        self.series_order: int = series_order
        self.name = name
        self.ydx: OneForm = OneForm(y * x.derivative())
        self._charts: dict = {}

    # -- basic queries

    def active_points(self) -> list:
        return [r.location for r in self.ram_points if r.active]

    def ram_point(self, p) -> RamificationPoint:
        for r in self.ram_points:
            if r.location == p or (r.location is INF and p is INF):
                return r
        raise KeyError(f"not a ramification point: {point_str(p)}")

    def deck(self, p):
        """Image of a point under the global involution (exact mode)."""
        self._require_exact()
        return self.involution.apply(p)

    def _require_exact(self):
        if self.mode != EXACT or self.involution is None:
            raise ModeError("operation requires a curve built in exact mode")

    def chart(self, p) -> "Chart":
        key = point_str(p)
        if key not in self._charts:
            self._charts[key] = Chart(self, p)
        return self._charts[key]

    # -- projection onto the pole basis over the active points

    def project_form(self, f: RationalFunction) -> dict:
        """Pole-basis coordinates of the 1-form ``f dz``.

        Keys are ``(point, order)``; at infinity the order is measured in the
        chart ``w = 1/z`` (so a polynomial coefficient of ``z^j`` contributes
        at order ``j + 2``).  Poles outside the active set raise
        UnexpectedPoleError.
        """
        actives = self.active_points()
        finite = [p for p in actives if p is not INF]
        inf_active = any(p is INF for p in actives)
        terms, poly = partial_fractions(f, finite)
        out = {(p, k): c for (p, k), c in terms.items()}
        if poly.is_zero():
            return out
        if not inf_active:
            raise UnexpectedPoleError(
                "polynomial part present but infinity is not an active point"
            )
        for j, c in enumerate(poly.coeffs):
            if c != 0:
                out[(INF, j + 2)] = -c  # c z^j dz = -c dw/w^(j+2)
        return out

    def project_function(self, f: RationalFunction):
        """Pole-basis coordinates of a function, plus its constant term.

        Returns ``(terms, constant)``; a polynomial part of positive degree
        maps to the basis at infinity (``z^j`` has order ``j`` there) and is
        an error when infinity is not active.
        """
        actives = self.active_points()
        finite = [p for p in actives if p is not INF]
        inf_active = any(p is INF for p in actives)
        terms, poly = partial_fractions(f, finite)
        out = {(p, k): c for (p, k), c in terms.items()}
        const = poly[0]
        if poly.degree >= 1:
            if not inf_active:
                raise UnexpectedPoleError(
                    "polynomial part present but infinity is not an active point"
                )
            for j, c in enumerate(poly.coeffs):
                if j >= 1 and c != 0:
                    out[(INF, j)] = c
        return out, const

    def form_basis_rf(self, q, k: int) -> RationalFunction:
        """The basis 1-form of order k at q, as a coefficient function of z."""
        if q is INF:
            # dw/w^k = -z^(k-2) dz
            return RationalFunction(Polynomial.monomial(k - 2, -QONE), Polynomial.one())
        return RationalFunction.pole_basis(q, k)

    def function_basis_rf(self, q, k: int) -> RationalFunction:
        """The basis function of order k at q (1/(z-q)^k, or z^k at infinity)."""
        return RationalFunction.pole_basis(q, k)

    # -- involution pullback as a linear map on the pole basis (exact mode)

    def form_pullback(self, q, k: int) -> dict:
        """Coordinates of the pullback of the order-k basis form at q."""
        self._require_exact()
        key = ("form_pb", point_str(q), k)
        if key not in self._charts:
            g = self.form_basis_rf(q, k)
            sig = self.involution
            pulled = compose_rf_mobius(g, sig) * sig.derivative_rf()
            self._charts[key] = self.project_form(pulled)
        return self._charts[key]

    def function_pullback(self, q, k: int):
        """Coordinates (terms, constant) of the pullback of the basis function."""
        self._require_exact()
        key = ("fn_pb", point_str(q), k)
        if key not in self._charts:
            g = self.function_basis_rf(q, k)
            pulled = compose_rf_mobius(g, self.involution)
            self._charts[key] = self.project_function(pulled)
        return self._charts[key]


class Chart:
    """Local coordinate at a ramification point, with cached expansions.

    The chart coordinate is ``zeta = z - p`` at a finite point and
    ``zeta = 1/z`` at infinity.  All series are exact truncations.
    """

    def __init__(self, curve: SpectralCurve, point):
        self.curve = curve
        self.point = point
        self.at_infinity = point is INF
        self._cache: dict = {}

    # -- coordinate transport

    def form_to_chart(self, f: RationalFunction) -> RationalFunction:
        """Rewrite the 1-form f(z) dz as g(zeta) d zeta."""
        if self.at_infinity:
            inner = RationalFunction(Polynomial.one(), Polynomial((QZERO, QONE)))
            return f.compose_rf(inner) * RationalFunction(
                Polynomial((-QONE,)), Polynomial((QZERO, QZERO, QONE))
            )
        return f.compose_poly(Polynomial((rat(self.point), QONE)))

    def function_to_chart(self, f: RationalFunction) -> RationalFunction:
        if self.at_infinity:
            inner = RationalFunction(Polynomial.one(), Polynomial((QZERO, QONE)))
            return f.compose_rf(inner)
        return f.compose_poly(Polynomial((rat(self.point), QONE)))

    def h_local(self) -> RationalFunction:
        """Coefficient of the 1-form y dx in this chart."""
        if "h_local" not in self._cache:
            self._cache["h_local"] = self.form_to_chart(self.curve.ydx.fn)
        return self._cache["h_local"]

    def sigma_mobius(self) -> Mobius:
        """Global involution conjugated into the chart (exact mode)."""
        self.curve._require_exact()
        if "sigma_mob" not in self._cache:
            sig = self.curve.involution
            if self.at_infinity:
                inv = Mobius.make(0, 1, 1, 0)
                loc = inv.compose(sig).compose(inv)
            else:
                p = rat(self.point)
                to = Mobius.make(1, p, 0, 1)  # zeta -> z = zeta + p
                back = Mobius.make(1, -p, 0, 1)
                loc = back.compose(sig).compose(to)
            self._cache["sigma_mob"] = loc
        return self._cache["sigma_mob"]

    def sigma_series(self, order: int) -> LaurentSeries:
        """sigma_loc(zeta) as a series vanishing at 0, with sigma_loc'(0) = -1."""
        key = ("sigma", order)
        if key not in self._cache:
            if self.curve.mode == EXACT:
                ser = series_expand(self.sigma_mobius().as_rf(), QZERO, order)
            else:
                if self.at_infinity:
                    raise ModeError("series mode does not support ramification at infinity")
                full = newton_local_inverse(self.curve.x, self.point, order)
                # drop the constant term: chart-relative series
                coeffs = [full.coeff(k) for k in range(1, order)]
                ser = LaurentSeries.make(QZERO, 1, coeffs, order)
            if ser.coeff(1) != -1 or (ser.min_degree < 1 and ser.coeff(0) != 0):
                raise UnsupportedRamificationError(
                    "local involution does not have the simple-ramification form"
                )
            self._cache[key] = LaurentSeries.make(QZERO, 1, [ser.coeff(k) for k in range(1, order)], order)
        return self._cache[key]

    def expand_form(self, f: RationalFunction, order: int) -> LaurentSeries:
        """Chart expansion of the 1-form f(z) dz."""
        return series_expand(self.form_to_chart(f), QZERO, order)

    def basis_form_chart_rf(self, q, k: int) -> RationalFunction:
        """Basis form of order k at q, written in this chart."""
        key = ("basisrf", point_str(q), k)
        if key not in self._cache:
            self._cache[key] = self.form_to_chart(self.curve.form_basis_rf(q, k))
        return self._cache[key]


def cauchy_kernel(a, b) -> OneForm:
    """The 1-form with simple poles of residue +1 at a and -1 at b.

    On the rational line this is (1/(z-a) - 1/(z-b)) dz; either endpoint may
    be the point at infinity, whose term vanishes.  Coincident endpoints give
    the zero form.
    """
    if (a is INF and b is INF) or (a is not INF and b is not INF and rat(a) == rat(b)):
        return OneForm(RationalFunction.zero())
    acc = RationalFunction.zero()
    if a is not INF:
        acc = acc + RationalFunction.pole_basis(rat(a), 1)
    if b is not INF:
        acc = acc - RationalFunction.pole_basis(rat(b), 1)
    return OneForm(acc)


def bergman_value(z1, z2):
    """Coefficient of dz1 dz2 in the second-kind kernel dz1 dz2/(z1-z2)^2."""
    z1, z2 = rat(z1), rat(z2)
    if z1 == z2:
        raise MalformedInputError("kernel evaluated on the diagonal")
    return QONE / (z1 - z2) ** 2


def bergman_sigma_diagonal(curve: SpectralCurve) -> RationalFunction:
    """Coefficient of dz^2 in the pullback of the kernel along (id, involution)."""
    curve._require_exact()
    sig = curve.involution
    sig_rf = sig.as_rf()
    z = RationalFunction.variable()
    return sig.derivative_rf() / (z - sig_rf) ** 2


class RecursionKernel:
    """The weight 1-form of the residue recursion at one ramification point.

    In exact mode the kernel is the rational expression
    ``omega(z1; sigma(z), z) / (sigma^* (y dx) - y dx)``; its value method
    returns the coefficient with respect to ``dz1 / dz``.  In both modes the
    expansion interface feeds the residue engine: term ``m`` carries the
    basis form of order ``m + 1`` (in the z1 slot) at this chart's point.
    """

    def __init__(self, curve: SpectralCurve, point):
        self.curve = curve
        self.point = point
        self.chart = curve.chart(point)
        ram = curve.ram_point(point)
        if not ram.active:
            raise DegenerateCurveError(
                f"kernel requested at an inactive point {point_str(point)}"
            )

    def denominator_rf(self) -> RationalFunction:
        """sigma^*(y dx) - y dx as a coefficient function of z (exact mode)."""
        self.curve._require_exact()
        sig = self.curve.involution
        h = self.curve.ydx.fn
        return compose_rf_mobius(h, sig) * sig.derivative_rf() - h

    def value(self, zv, z1v):
        """Exact kernel coefficient at rational (z, z1), with respect to dz1/dz."""
        self.curve._require_exact()
        zv, z1v = rat(zv), rat(z1v)
        sz = self.curve.involution.apply(zv)
        if sz is INF:
            raise MalformedInputError("involution sends the sample to infinity")
        num = QONE / (z1v - sz) - QONE / (z1v - zv)
        den = self.denominator_rf().evaluate(zv)
        if den == 0:
            raise DegenerateCurveError("kernel denominator vanishes at the sample")
        return num / den

    def denominator_series(self, order: int) -> LaurentSeries:
        """(h_loc(sigma_loc) sigma_loc' - h_loc) in the chart, truncated."""
        h = self.chart.h_local()
        if self.curve.mode == EXACT:
            mob = self.chart.sigma_mobius()
            pulled = compose_rf_mobius(h, mob) * mob.derivative_rf()
            return series_expand(pulled - h, QZERO, order)
        sig = self.chart.sigma_series(order + 4)
        hser = series_expand(h, QZERO, order + 4)
        if hser.min_degree < 0:
            raise DegenerateCurveError("curve form has a pole at a ramification point")
        pulled = hser.compose(sig) * sig.derivative()
        return (pulled - hser).truncate(order)

    def inverse_denominator_series(self, order: int) -> LaurentSeries:
        den = self.denominator_series(order + 3)
        lead = den.leading_order()
        if lead is None:
            raise DegenerateCurveError("kernel denominator vanishes identically")
        if lead != 2:
            raise DegenerateCurveError(
                f"kernel denominator vanishes to order {lead}, expected 2"
            )
        return den.inverse().truncate(order)

    def numerator_term_series(self, m: int, order: int) -> LaurentSeries:
        """Series of (sigma_loc(zeta)^m - zeta^m); pairs with slot order m+1."""
        if m >= order:
            return LaurentSeries.make(QZERO, order, [], order)
        sig = self.chart.sigma_series(order + 1)
        pw = sig.power(m).truncate(order)
        mono = LaurentSeries.make(QZERO, m, [QONE], order)
        return pw - mono


def recursion_kernel(curve: SpectralCurve, point) -> RecursionKernel:
    """Recursion-kernel accessor for one active ramification point."""
    return RecursionKernel(curve, point)


# ---------------------------------------------------------------------------
# curve construction
# ---------------------------------------------------------------------------


def _map_degree(x: RationalFunction) -> int:
    return max(x.num.degree, x.den.degree)


def _global_involution(x: RationalFunction) -> Mobius:
    """The nontrivial deck transformation of a degree-2 rational map.

    For x = P/Q the two preimages z, t of a common value satisfy
    P(t)Q(z) - Q(t)P(z) = (t - z)(alpha t z + beta (t + z) + gamma), so the
    second sheet is t = -(beta z + gamma)/(alpha z + beta).
    """
    p2, p1, p0 = x.num[2], x.num[1], x.num[0]
    q2, q1, q0 = x.den[2], x.den[1], x.den[0]
    alpha = p2 * q1 - p1 * q2
    beta = p2 * q0 - p0 * q2
    gamma = p1 * q0 - p0 * q1
    if alpha == 0 and beta == 0 and gamma == 0:
        raise ModeError("x is not a degree-2 map; no global sheet involution")
    return Mobius.make(-beta, -gamma, alpha, beta)


def build_curve(
    x: RationalFunction,
    y: RationalFunction,
    mode: str = EXACT,
    series_order: int = DEFAULT_SERIES_ORDER,
    name: str = "",
) -> SpectralCurve:
    """Assemble a spectral curve from its rational parametrization.

    Ramification points are the simple critical points of x with rational
    (or infinite) location; a point is active when y dx has a zero of order
    exactly 2 there.  In exact mode the sheet involution must be a global
    Moebius map under which y dx is anti-invariant.
    """
    if _map_degree(x) < 1:
        raise MalformedInputError("x must be non-constant")
    if y.is_zero():
        raise MalformedInputError("y must be nonzero")
    form = y * x.derivative()
    if form.is_zero():
        raise MalformedInputError("y dx vanishes identically")

    if mode == EXACT:
        if _map_degree(x) != 2:
            raise ModeError(
                f"exact mode needs a degree-2 base map, got degree {_map_degree(x)}"
            )
        sigma = _global_involution(x)
        if not sigma.is_involution():
            raise UnsupportedCurveError("sheet transformation is not an involution")
        if compose_rf_mobius(x, sigma) != x:
            raise UnsupportedCurveError("sheet transformation does not preserve x")
        # anti-invariance of y dx is equivalent to y(sigma(z)) = -y(z)
        if compose_rf_mobius(y, sigma) != -y:
            raise UnsupportedCurveError(
                "y is not anti-invariant under the sheet involution; "
                "the parametrization does not describe a trace-free double cover"
            )
        try:
            fixed = sigma.fixed_points()
        except UnsupportedRamificationError as exc:
            raise UnsupportedCurveError(
                f"irrational ramification point in exact mode: {exc}"
            ) from exc
        # every zero of y dx must be a double zero at a fixed point of the
        # involution; a stray zero gives the recursion kernel a pole away
        # from the ramification points and breaks the contour calculus that
        # all the closed-form identities rest on
        finite_fixed = {p for p in fixed if p is not INF}
        zeros, leftover = rational_roots(form.num)
        if leftover.degree > 0:
            raise UnsupportedCurveError(
                "y dx has irrational zeros away from the ramification points"
            )
        for root in sorted(zeros):
            if root not in finite_fixed:
                raise UnsupportedCurveError(
                    f"y dx vanishes at z = {point_str(root)}, which is not a "
                    "ramification point of the covering"
                )
        inf_order = form.form_order_at(INF)
        if inf_order > 0 and INF not in fixed:
            raise UnsupportedCurveError(
                "y dx vanishes at infinity, which is not a ramification point"
            )
        rams = []
        for p in sorted(fixed, key=point_sort_key):
            order = form.form_order_at(p)
            rams.append(
                RamificationPoint(
                    location=p,
                    active=(order == 2),
                    form_order=order,
                    involution=sigma,
                )
            )
        return SpectralCurve(x, y, EXACT, rams, sigma, series_order, name)

    if mode == SERIES:
        xprime = x.derivative()
        roots, leftover = rational_roots(xprime.num)
        if leftover.degree > 0:
            raise UnsupportedCurveError(
                "x' has irrational zeros; such ramification points are unsupported"
            )
        # ramification at infinity over a finite base value cannot be handled
        # by the local-series machinery
        xinf = series_expand(x, INF, 3)
        if xinf.min_degree >= 0 and xinf.coeff(1) == 0 and OneForm(form).order_at(INF) == 2:
            raise ModeError(
                "curve is actively ramified at infinity; use exact mode"
            )
        rams = []
        for p in sorted(roots):
            mult = roots[p]
            if xprime.den.evaluate(p) == 0:
                continue  # x has a pole here; not a critical point of the covering
            if mult > 1:
                raise UnsupportedRamificationError(
                    f"x''({point_str(p)}) = 0: ramification is not simple"
                )
            order = form.form_order_at(p)
            sig = newton_local_inverse(x, p, series_order)
            rams.append(
                RamificationPoint(
                    location=p, active=(order == 2), form_order=order, involution=sig
                )
            )
        return SpectralCurve(x, y, SERIES, rams, None, series_order, name)

    raise MalformedInputError(f"unknown mode: {mode!r}")
