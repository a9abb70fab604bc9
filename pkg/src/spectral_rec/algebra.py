"""Exact univariate arithmetic: polynomials, rational functions, Laurent series.

All coefficients are exact rationals (:data:`spectral_rec._rat.Q`).  A
polynomial is a tuple of coefficients, lowest degree first, with no trailing
zero; the zero polynomial is the empty tuple.  A rational function is kept in
canonical form: numerator and denominator coprime, denominator monic.  A
Laurent series is a finite window of exact coefficients
``c[min_degree] .. c[truncation_order - 1]`` around a center, which may be a
rational point or the point at infinity (coefficients then refer to
``w = 1/z``).

Everything here is immutable and pure, so values can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ._rat import INF, Q, QONE, QZERO, rat, rat_str
from .errors import (
    LogarithmicTermError,
    MalformedInputError,
    PoleEvaluationError,
    UnexpectedPoleError,
    UnsupportedRamificationError,
)

__all__ = [
    "Polynomial",
    "RationalFunction",
    "LaurentSeries",
    "Mobius",
    "normalize",
    "residue_at",
    "residue_at_infinity",
    "partial_fractions",
    "antiderivative",
    "series_expand",
    "newton_local_inverse",
    "evaluate",
    "rational_roots",
    "format_polynomial",
    "format_rational_function",
    "compose_rf_mobius",
]


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


class Polynomial:
    """Dense univariate polynomial over the exact rationals."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [rat(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple = tuple(cs)

    # -- constructors

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls(())

    @classmethod
    def one(cls) -> "Polynomial":
        return cls((QONE,))

    @classmethod
    def const(cls, c) -> "Polynomial":
        return cls((rat(c),))

    @classmethod
    def variable(cls) -> "Polynomial":
        return cls((QZERO, QONE))

    @classmethod
    def monomial(cls, degree: int, c=QONE) -> "Polynomial":
        return cls((QZERO,) * degree + (rat(c),))

    # -- structure

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, k: int):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return QZERO

    def leading(self):
        if not self.coeffs:
            return QZERO
        return self.coeffs[-1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    # -- arithmetic

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            a, b = self.coeffs, other.coeffs
            if not a or not b:
                return Polynomial()
            out = [QZERO] * (len(a) + len(b) - 1)
            for i, ai in enumerate(a):
                if ai == 0:
                    continue
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
            return Polynomial(out)
        c = rat(other)
        return Polynomial(tuple(c * x for x in self.coeffs))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Polynomial.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def divmod(self, other: "Polynomial"):
        """Euclidean division: self = q*other + r with deg r < deg other."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        d = other.degree
        lead = other.leading()
        if len(rem) - 1 < d:
            return Polynomial(), self
        quot = [QZERO] * (len(rem) - d)
        for k in range(len(rem) - 1, d - 1, -1):
            c = rem[k] / lead
            if c != 0:
                quot[k - d] = c
                for j, oj in enumerate(other.coeffs):
                    rem[k - d + j] -= c * oj
        return Polynomial(quot), Polynomial(rem[:d])

    def gcd(self, other: "Polynomial") -> "Polynomial":
        """Monic greatest common divisor."""
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        if a.is_zero():
            return a
        return a * (QONE / a.leading())

    def derivative(self) -> "Polynomial":
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k))

    def evaluate(self, z0):
        z0 = rat(z0)
        acc = QZERO
        for c in reversed(self.coeffs):
            acc = acc * z0 + c
        return acc

    def shift(self, a) -> "Polynomial":
        """Taylor shift: returns p(z + a)."""
        a = rat(a)
        if a == 0 or self.is_zero():
            return self
        out = Polynomial()
        for c in reversed(self.coeffs):
            out = out * Polynomial((a, QONE)) + Polynomial.const(c)
        return out

    def compose(self, inner: "Polynomial") -> "Polynomial":
        out = Polynomial()
        for c in reversed(self.coeffs):
            out = out * inner + Polynomial.const(c)
        return out

    def valuation_at(self, p) -> int:
        """Multiplicity of the root p (0 if p is not a root)."""
        p = rat(p)
        if self.is_zero():
            raise ValueError("valuation of the zero polynomial")
        v = 0
        poly = self
        while poly.evaluate(p) == 0:
            poly = poly.divmod(Polynomial((-p, QONE)))[0]
            v += 1
        return v

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        return self * (QONE / self.leading())

    def __repr__(self) -> str:
        return f"Polynomial({format_polynomial(self)!r})"


def format_polynomial(p: Polynomial, var: str = "z") -> str:
    """Canonical human/machine-readable form, highest degree first."""
    if p.is_zero():
        return "0"
    parts = []
    for k in range(p.degree, -1, -1):
        c = p[k]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if k == 0:
            body = rat_str(mag)
        else:
            zpow = var if k == 1 else f"{var}^{k}"
            body = zpow if mag == 1 else f"{rat_str(mag)}*{zpow}"
        parts.append((sign, body))
    head_sign, head = parts[0]
    text = ("-" if head_sign == "-" else "") + head
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def rational_roots(p: Polynomial):
    """All rational roots of ``p`` with multiplicities.

    Returns ``(roots, leftover)`` where ``roots`` maps root -> multiplicity
    and ``leftover`` is the monic factor of ``p`` with no rational roots.
    """
    if p.is_zero():
        raise ValueError("roots of the zero polynomial")
    roots: dict = {}
    poly = p.monic()
    # root at zero
    v = 0
    while poly.coeffs and poly.coeffs[0] == 0:
        poly = Polynomial(poly.coeffs[1:])
        v += 1
    if v:
        roots[QZERO] = v
    if poly.degree >= 1:
        # clear denominators to apply the rational root theorem
        den_lcm = 1
        for c in poly.coeffs:
            den_lcm = den_lcm * c.denominator // _gcd_int(den_lcm, int(c.denominator))
        zcoeffs = [int(c * den_lcm) for c in poly.coeffs]
        a0, an = zcoeffs[0], zcoeffs[-1]
        candidates = set()
        for pnum in _divisors(a0):
            for qden in _divisors(an):
                candidates.add(Q(pnum, qden))
                candidates.add(Q(-pnum, qden))
        for cand in sorted(candidates):
            while poly.degree >= 1 and poly.evaluate(cand) == 0:
                poly = poly.divmod(Polynomial((-cand, QONE)))[0]
                roots[cand] = roots.get(cand, 0) + 1
    return roots, poly.monic()


def _gcd_int(a: int, b: int) -> int:
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a if a else 1


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------


class RationalFunction:
    """Quotient of two polynomials in canonical form (coprime, monic bottom)."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _canonical=False):
        if not isinstance(num, Polynomial):
            num = Polynomial.const(num) if not isinstance(num, (tuple, list)) else Polynomial(num)
        if den is None:
            den = Polynomial.one()
        elif not isinstance(den, Polynomial):
            den = Polynomial.const(den) if not isinstance(den, (tuple, list)) else Polynomial(den)
        if den.is_zero():
            raise MalformedInputError("zero denominator")
        if not _canonical:
            if num.is_zero():
                den = Polynomial.one()
            else:
                g = num.gcd(den)
                if g.degree > 0:
                    num = num.divmod(g)[0]
                    den = den.divmod(g)[0]
                lead = den.leading()
                if lead != 1:
                    inv = QONE / lead
                    num = num * inv
                    den = den * inv
        self.num = num
        self.den = den

    # -- constructors

    @classmethod
    def zero(cls) -> "RationalFunction":
        return cls(Polynomial(), Polynomial.one(), _canonical=True)

    @classmethod
    def const(cls, c) -> "RationalFunction":
        return cls(Polynomial.const(c), Polynomial.one(), _canonical=True)

    @classmethod
    def variable(cls) -> "RationalFunction":
        return cls(Polynomial.variable(), Polynomial.one(), _canonical=True)

    @classmethod
    def pole_basis(cls, p, k: int) -> "RationalFunction":
        """1/(z - p)^k for finite p, z^k for the point at infinity."""
        if p is INF:
            return cls(Polynomial.monomial(k), Polynomial.one())
        return cls(Polynomial.one(), Polynomial((-rat(p), QONE)) ** k)

    # -- structure

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Q)):
            other = RationalFunction.const(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    # -- arithmetic

    def __add__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den, _canonical=True)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-_as_rf(other))

    def __rsub__(self, other) -> "RationalFunction":
        return _as_rf(other) + (-self)

    def __mul__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "RationalFunction":
        return _as_rf(other) / self

    def __pow__(self, n: int) -> "RationalFunction":
        if n < 0:
            if self.is_zero():
                raise ZeroDivisionError("negative power of zero")
            return RationalFunction(self.den ** (-n), self.num ** (-n))
        return RationalFunction(self.num**n, self.den**n)

    def derivative(self) -> "RationalFunction":
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def evaluate(self, z0):
        z0 = rat(z0)
        dv = self.den.evaluate(z0)
        if dv == 0:
            raise PoleEvaluationError(f"evaluation at the pole z = {rat_str(z0)}")
        return self.num.evaluate(z0) / dv

    def compose_poly(self, inner: Polynomial) -> "RationalFunction":
        return RationalFunction(self.num.compose(inner), self.den.compose(inner))

    def compose_rf(self, inner: "RationalFunction") -> "RationalFunction":
        """self(inner(z)), via homogenization of both layers."""
        d = max(self.num.degree, self.den.degree, 0)
        npow = [inner.num**k for k in range(d + 1)]
        dpow = [inner.den**k for k in range(d + 1)]

        def lift(poly: Polynomial) -> Polynomial:
            acc = Polynomial()
            for k in range(d + 1):
                c = poly[k]
                if c != 0:
                    acc = acc + c * npow[k] * dpow[d - k]
            return acc

        return RationalFunction(lift(self.num), lift(self.den))

    def order_at(self, p) -> int:
        """Order of vanishing at p (negative for a pole).

        At infinity this is the order in w = 1/z, so e.g. z^2 has order -2.
        """
        if self.is_zero():
            raise ValueError("order of the zero function")
        if p is INF:
            return self.den.degree - self.num.degree
        p = rat(p)
        return self.num.valuation_at(p) - self.den.valuation_at(p)

    def form_order_at(self, p) -> int:
        """Order of the 1-form self*dz at p; dz itself has a double pole at infinity."""
        return self.order_at(p) - (2 if p is INF else 0)

    def __repr__(self) -> str:
        return f"RationalFunction({format_rational_function(self)!r})"


def _as_rf(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    return RationalFunction.const(rat(x))


def format_rational_function(f: RationalFunction, var: str = "z") -> str:
    num = format_polynomial(f.num, var)
    if f.den == Polynomial.one():
        return num
    return f"({num})/({format_polynomial(f.den, var)})"


# ---------------------------------------------------------------------------
# truncated Laurent series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaurentSeries:
    """Window of exact Laurent coefficients around ``center``.

    ``coeffs[i]`` is the coefficient of ``t^(min_degree + i)`` where ``t`` is
    the local coordinate: ``z - center`` at a finite center and ``w = 1/z`` at
    infinity.  ``truncation_order`` is exclusive; terms at or beyond it are
    unknown (not zero).
    """

    center: object
    min_degree: int
    coeffs: tuple
    truncation_order: int

    def __post_init__(self):
        if len(self.coeffs) != self.truncation_order - self.min_degree:
            raise MalformedInputError("laurent window is inconsistent")

    @classmethod
    def make(cls, center, min_degree: int, coeffs: Sequence, truncation_order: int):
        cs = [rat(c) for c in coeffs]
        need = truncation_order - min_degree
        if need < 0:
            raise MalformedInputError("empty laurent window")
        cs = (cs + [QZERO] * need)[:need]
        # canonical: drop leading stored zeros
        while cs and cs[0] == 0 and min_degree < truncation_order:
            cs.pop(0)
            min_degree += 1
        return cls(center, min_degree, tuple(cs), truncation_order)

    def coeff(self, k: int):
        if k >= self.truncation_order:
            raise ValueError(f"coefficient {k} beyond truncation {self.truncation_order}")
        if k < self.min_degree:
            return QZERO
        return self.coeffs[k - self.min_degree]

    def leading_order(self):
        """Order of the first nonzero stored coefficient, or None if the window is zero."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return self.min_degree + i
        return None

    def is_window_zero(self) -> bool:
        return self.leading_order() is None

    def _check(self, other: "LaurentSeries"):
        if self.center != other.center:
            raise MalformedInputError("laurent centers differ")

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        self._check(other)
        lo = min(self.min_degree, other.min_degree)
        hi = min(self.truncation_order, other.truncation_order)
        return LaurentSeries.make(
            self.center, lo, [self.coeff(k) + other.coeff(k) for k in range(lo, hi)], hi
        )

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(self.center, self.min_degree, tuple(-c for c in self.coeffs), self.truncation_order)

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + (-other)

    def __mul__(self, other) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            self._check(other)
            lo = self.min_degree + other.min_degree
            hi = min(
                self.truncation_order + other.min_degree,
                other.truncation_order + self.min_degree,
            )
            out = [QZERO] * (hi - lo)
            for i, a in enumerate(self.coeffs):
                if a == 0:
                    continue
                ka = self.min_degree + i
                jmax = min(len(other.coeffs), hi - ka - other.min_degree)
                for j in range(jmax):
                    b = other.coeffs[j]
                    if b != 0:
                        out[ka + other.min_degree + j - lo] += a * b
            return LaurentSeries.make(self.center, lo, out, hi)
        c = rat(other)
        return LaurentSeries(
            self.center, self.min_degree, tuple(c * x for x in self.coeffs), self.truncation_order
        )

    __rmul__ = __mul__

    def inverse(self) -> "LaurentSeries":
        """Multiplicative inverse (leading stored coefficient must be nonzero)."""
        lead = self.leading_order()
        if lead is None:
            raise ZeroDivisionError("inverse of a zero series window")
        v = lead - self.min_degree
        unit = self.coeffs[v:]
        n = len(unit)
        inv = [QZERO] * n
        inv[0] = QONE / unit[0]
        for m in range(1, n):
            s = QZERO
            for k in range(1, m + 1):
                if k < len(unit) and unit[k] != 0:
                    s += unit[k] * inv[m - k]
            inv[m] = -s * inv[0]
        min_deg = -lead
        return LaurentSeries.make(self.center, min_deg, inv, min_deg + n)

    def __truediv__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self * other.inverse()

    def power(self, n: int) -> "LaurentSeries":
        if n < 0:
            return self.inverse().power(-n)
        result = LaurentSeries.make(self.center, 0, [QONE], self.truncation_order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def compose(self, inner: "LaurentSeries") -> "LaurentSeries":
        """self(inner(t)); requires self to be a power series (min_degree >= 0)
        and inner to vanish at the center (min_degree >= 1)."""
        if self.min_degree < 0:
            raise MalformedInputError("composition needs a power series on the outside")
        if inner.min_degree < 1 and inner.coeff(0) != 0:
            raise MalformedInputError("inner series must vanish at the center")
        hi = inner.truncation_order
        acc = LaurentSeries.make(inner.center, 0, [self.coeff(self.truncation_order - 1)], hi)
        for k in range(self.truncation_order - 2, self.min_degree - 1, -1):
            acc = acc * inner
            c = self.coeff(k)
            if c != 0:
                acc = acc + LaurentSeries.make(inner.center, 0, [c], hi)
        for _ in range(self.min_degree):
            acc = acc * inner
        return acc

    def derivative(self) -> "LaurentSeries":
        """Termwise d/dt (local coordinate derivative)."""
        lo = self.min_degree - 1
        out = []
        for i, c in enumerate(self.coeffs):
            k = self.min_degree + i
            out.append(k * c)
        return LaurentSeries.make(self.center, lo, out, self.truncation_order - 1)

    def integrate(self) -> "LaurentSeries":
        """Termwise antiderivative with zero constant; t^-1 must be absent."""
        if self.min_degree <= -1 <= self.truncation_order - 1 and self.coeff(-1) != 0:
            raise LogarithmicTermError("series has a nonzero residue term")
        out = {}
        for i, c in enumerate(self.coeffs):
            k = self.min_degree + i
            if k == -1:
                continue
            out[k + 1] = c / (k + 1)
        lo = self.min_degree + 1
        hi = self.truncation_order + 1
        return LaurentSeries.make(self.center, lo, [out.get(k, QZERO) for k in range(lo, hi)], hi)

    def truncate(self, order: int) -> "LaurentSeries":
        if order >= self.truncation_order:
            return self
        if order <= self.min_degree:
            return LaurentSeries.make(self.center, order, [], order)
        return LaurentSeries.make(self.center, self.min_degree, self.coeffs[: order - self.min_degree], order)

    def sqrt(self, seed) -> "LaurentSeries":
        """Series square root with prescribed value ``seed`` of the constant term.

        Requires min_degree >= 0 and seed^2 == coeff(0).
        """
        if self.min_degree < 0:
            raise MalformedInputError("sqrt needs a power series")
        seed = rat(seed)
        c0 = self.coeff(0)
        if seed * seed != c0:
            raise MalformedInputError("sqrt seed does not square to the constant term")
        if seed == 0:
            raise MalformedInputError("sqrt seed must be nonzero")
        n = self.truncation_order
        out = [QZERO] * n
        out[0] = seed
        for m in range(1, n):
            s = QZERO
            for i in range(1, m):
                s += out[i] * out[m - i]
            out[m] = (self.coeff(m) - s) / (2 * seed)
        return LaurentSeries.make(self.center, 0, out, n)

    def equal_window(self, other: "LaurentSeries") -> bool:
        """Exact agreement on the overlap of the two windows."""
        hi = min(self.truncation_order, other.truncation_order)
        lo = min(self.min_degree, other.min_degree)
        return all(self.coeff(k) == other.coeff(k) for k in range(lo, hi))


# ---------------------------------------------------------------------------
# Moebius transformations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Mobius:
    """z -> (a z + b) / (c z + d) with exact rational entries, det != 0."""

    a: object
    b: object
    c: object
    d: object

    @classmethod
    def make(cls, a, b, c, d) -> "Mobius":
        a, b, c, d = rat(a), rat(b), rat(c), rat(d)
        if a * d - b * c == 0:
            raise MalformedInputError("moebius map is singular")
        # canonical scale: first nonzero of (a, b, c, d) equals 1
        for pivot in (a, b, c, d):
            if pivot != 0:
                a, b, c, d = a / pivot, b / pivot, c / pivot, d / pivot
                break
        return cls(a, b, c, d)

    @classmethod
    def identity(cls) -> "Mobius":
        return cls.make(1, 0, 0, 1)

    def apply(self, p):
        """Image of a point of the projective line (rational or INF)."""
        if p is INF:
            if self.c == 0:
                return INF
            return self.a / self.c
        p = rat(p)
        den = self.c * p + self.d
        if den == 0:
            return INF
        return (self.a * p + self.b) / den

    def as_rf(self) -> RationalFunction:
        return RationalFunction(Polynomial((self.b, self.a)), Polynomial((self.d, self.c)))

    def compose(self, other: "Mobius") -> "Mobius":
        """self after other: z -> self(other(z))."""
        return Mobius.make(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def is_identity(self) -> bool:
        return self.b == 0 and self.c == 0 and self.a == self.d

    def is_involution(self) -> bool:
        return self.compose(self).is_identity()

    def derivative_rf(self) -> RationalFunction:
        return self.as_rf().derivative()

    def fixed_points(self) -> list:
        """Fixed points on the projective line (each rational or INF).

        Raises UnsupportedRamificationError when they are irrational.
        """
        # c z^2 + (d - a) z - b = 0
        if self.c == 0:
            pts = [INF]
            if self.a != self.d:
                pts.insert(0, self.b / (self.d - self.a))
            return pts
        disc = (self.d - self.a) ** 2 + 4 * self.b * self.c
        root = _rat_sqrt(disc)
        if root is None:
            raise UnsupportedRamificationError(
                "fixed points of the sheet involution are irrational"
            )
        sols = {((self.a - self.d) + root) / (2 * self.c), ((self.a - self.d) - root) / (2 * self.c)}
        return sorted(sols)


def _rat_sqrt(q):
    """Exact square root of a rational, or None when it is not a square."""
    q = rat(q)
    if q < 0:
        return None
    if q == 0:
        return QZERO
    num, den = int(q.numerator), int(q.denominator)
    rn = _isqrt(num)
    rd = _isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Q(rn, rd)
    return None


def _isqrt(n: int) -> int:
    import math

    return math.isqrt(n)


def compose_rf_mobius(f: RationalFunction, m: Mobius) -> RationalFunction:
    """f((a z + b)/(c z + d)) as an exact rational function."""
    top = Polynomial((m.b, m.a))
    bot = Polynomial((m.d, m.c))
    d = max(f.num.degree, f.den.degree, 0)
    tpow = [top**k for k in range(d + 1)]
    bpow = [bot**k for k in range(d + 1)]

    def lift(poly: Polynomial) -> Polynomial:
        acc = Polynomial()
        for k in range(d + 1):
            c = poly[k]
            if c != 0:
                acc = acc + c * tpow[k] * bpow[d - k]
        return acc

    return RationalFunction(lift(f.num), lift(f.den))


# ---------------------------------------------------------------------------
# spec operations
# ---------------------------------------------------------------------------


def normalize(f: RationalFunction) -> RationalFunction:
    """Canonical form of a rational function (the constructor already is)."""
    return RationalFunction(f.num, f.den)


def evaluate(f: RationalFunction, z0):
    """Exact value of f at a non-pole rational point."""
    return f.evaluate(z0)


def series_expand(f: RationalFunction, p, order: int) -> LaurentSeries:
    """Laurent expansion of f at p (or at infinity) truncated before ``order``."""
    if f.is_zero():
        return LaurentSeries.make(p, 0, [], order)
    if p is INF:
        # substitute z = 1/w:  N(1/w)/D(1/w) = w^(degD-degN) * rev(N)/rev(D)
        ndeg, ddeg = f.num.degree, f.den.degree
        rnum = Polynomial(tuple(reversed(f.num.coeffs)))
        rden = Polynomial(tuple(reversed(f.den.coeffs)))
        shift_pow = ddeg - ndeg
        num_s, den_s = rnum, rden
    else:
        p = rat(p)
        num_s = f.num.shift(p)
        den_s = f.den.shift(p)
        shift_pow = 0
    vn = _trailing_valuation(num_s)
    vd = _trailing_valuation(den_s)
    lead = shift_pow + vn - vd
    ncoeffs = num_s.coeffs[vn:]
    dcoeffs = den_s.coeffs[vd:]
    n_terms = order - lead
    if n_terms <= 0:
        return LaurentSeries.make(p, order, [], order)
    # series division  (ncoeffs / dcoeffs) to n_terms coefficients
    inv0 = QONE / dcoeffs[0]
    out = [QZERO] * n_terms
    for m in range(n_terms):
        s = ncoeffs[m] if m < len(ncoeffs) else QZERO
        for k in range(1, min(m, len(dcoeffs) - 1) + 1):
            if dcoeffs[k] != 0:
                s -= dcoeffs[k] * out[m - k]
        out[m] = s * inv0
    return LaurentSeries.make(p, lead, out, order)


def _trailing_valuation(p: Polynomial) -> int:
    for i, c in enumerate(p.coeffs):
        if c != 0:
            return i
    return 0


def residue_at(f: RationalFunction, p):
    """Coefficient of 1/(z - p) in the expansion of f at the finite point p."""
    if f.is_zero():
        return QZERO
    p = rat(p)
    v = f.den.valuation_at(p)
    if v == 0:
        return QZERO
    return series_expand(f, p, 0).coeff(-1)


def residue_at_infinity(f: RationalFunction):
    """Residue of the 1-form f(z) dz at infinity: -[z^-1] f."""
    if f.is_zero():
        return QZERO
    ser = series_expand(f, INF, 2)
    return -ser.coeff(1)


def partial_fractions(f: RationalFunction, poles: Iterable):
    """Exact partial-fraction data of ``f`` over the given finite poles.

    Returns ``(terms, poly_part)`` with ``terms[(p, k)]`` the coefficient of
    ``1/(z - p)^k``.  Any root of the denominator outside ``poles`` raises
    UnexpectedPoleError; that is how pole-support invariants are enforced.
    """
    poly_part, rem = f.num.divmod(f.den)
    terms: dict = {}
    den = f.den
    pole_list = sorted({rat(p) for p in poles})
    mults = []
    for p in pole_list:
        m = den.valuation_at(p)
        mults.append((p, m))
    total = sum(m for _, m in mults)
    if total != den.degree:
        leftover = den
        for p, m in mults:
            for _ in range(m):
                leftover = leftover.divmod(Polynomial((-p, QONE)))[0]
        raise UnexpectedPoleError(
            f"denominator factor without a declared pole: {format_polynomial(leftover)}"
        )
    if rem.is_zero():
        return terms, poly_part
    g = RationalFunction(rem, den, _canonical=True)
    for p, m in mults:
        if m == 0:
            continue
        ser = series_expand(g, p, 0)
        for k in range(1, m + 1):
            c = ser.coeff(-k)
            if c != 0:
                terms[(p, k)] = c
    return terms, poly_part


def antiderivative(f: RationalFunction) -> RationalFunction:
    """Rational antiderivative with zero constant term in the pole basis.

    Requires every pole of f to have zero residue; a simple pole raises
    LogarithmicTermError.  The denominator must split over the rationals.
    """
    if f.is_zero():
        return RationalFunction.zero()
    roots, leftover = rational_roots(f.den) if f.den.degree > 0 else ({}, Polynomial.one())
    if leftover.degree > 0:
        raise UnexpectedPoleError(
            f"denominator does not split over Q: {format_polynomial(leftover)}"
        )
    terms, poly_part = partial_fractions(f, roots.keys())
    acc = RationalFunction.zero()
    for (p, k), c in sorted(terms.items()):
        if k == 1:
            raise LogarithmicTermError(
                f"nonzero residue {rat_str(c)} at z = {rat_str(p)}"
            )
        acc = acc + RationalFunction.pole_basis(p, k - 1) * (-c / (k - 1))
    int_poly = Polynomial(
        (QZERO,) + tuple(c / (i + 1) for i, c in enumerate(poly_part.coeffs))
    )
    return acc + RationalFunction(int_poly, Polynomial.one(), _canonical=True)


def newton_local_inverse(x: RationalFunction, p, order: int) -> LaurentSeries:
    """Local sheet involution at a simple critical point of x.

    Returns the series of sigma(z) around p (constant term p included) with
    x(sigma(z)) = x(z) mod (z-p)^order, sigma(p) = p, sigma'(p) = -1.
    Newton iteration doubles the matched order each step.
    """
    p = rat(p)
    work = max(order, 3) + 2
    xser = series_expand(x, p, work)
    if xser.min_degree < 0:
        raise UnsupportedRamificationError("x has a pole at the requested point")
    if xser.coeff(1) != 0:
        raise UnsupportedRamificationError("x'(p) != 0: not a ramification point")
    if xser.coeff(2) == 0:
        raise UnsupportedRamificationError("x''(p) == 0: ramification is not simple")
    # X(s) = x(p+s) - x(p) as a power series in s, X(s) = c2 s^2 + ...
    big = LaurentSeries.make(p, 1, [xser.coeff(k) for k in range(1, work)], work)
    bigd = big.derivative()

    u = LaurentSeries.make(p, 1, [-QONE], work)  # seed: -t, correct through t^1
    matched = 1
    dbig = LaurentSeries.make(p, 0, [bigd.coeff(k) for k in range(0, work - 1)], work - 1)
    while matched < order:
        err = big.compose(u) - big
        u = (u - err / dbig.compose(u)).truncate(work)
        matched *= 2
    u = u.truncate(order)
    # resubstitution guard: x(sigma(z)) = x(z) through the requested order
    if not big.compose(u).truncate(order).equal_window(big.truncate(order)):
        raise UnsupportedRamificationError("local inverse failed to converge")
    coeffs = [p] + [u.coeff(k) for k in range(1, order)]
    return LaurentSeries.make(p, 0, coeffs, order)
