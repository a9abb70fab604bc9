"""Potentials of the correlators and the differential recursion they satisfy.

Integrating a stable correlator once in every slot, with no integration
constants in the pole basis, produces its *potential* (the multi-variable
generating function whose full differential returns the correlator).  The
fiber-normalization condition -- the sum over the two sheets vanishes in
every slot -- certifies that dropping the constants was the right choice.

The potentials obey a differential recursion (the integrated form of the
residue recursion); ``df_via_differential_recursion`` evaluates its right
side at exact rational samples, which is the independent cross-path used by
the verification suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from ._rat import INF, QONE, QZERO, point_str, rat, rat_str
from .algebra import RationalFunction
from .curve import EXACT, SpectralCurve, bergman_sigma_diagonal
from .errors import (
    BadSampleError,
    IncompleteTableError,
    InvariantViolationError,
    InternalConsistencyError,
    LogarithmicTermError,
    NormalizationError,
    UnsupportedOperationError,
)
from .recursion import (
    Correlator,
    CorrelatorTable,
    _multiset_permutation_count,
    _sample_stream,
    form_basis_value,
    index_sort_key,
    sort_indices,
)

__all__ = [
    "FreeEnergy",
    "FreeEnergyTable",
    "integrate_correlator",
    "diagonal_specialize",
    "df_via_differential_recursion",
    "verify_free_energies",
    "function_basis_value",
    "function_basis_derivative_value",
]


def function_basis_value(q, k: int, v):
    """Value of the order-k basis function at z = v (1/(z-q)^k, or z^k)."""
    v = rat(v)
    if q is INF:
        return v**k
    return QONE / (v - q) ** k


def function_basis_derivative_value(q, k: int, v):
    v = rat(v)
    if q is INF:
        return k * v ** (k - 1)
    return -k / (v - q) ** (k + 1)


def _basis_rf(q, k: int) -> RationalFunction:
    return RationalFunction.pole_basis(q, k)


class FreeEnergy:
    """Symmetric tensor of products of basis functions for one stable (g, n)."""

    def __init__(self, g: int, n: int, terms: dict):
        self.g = g
        self.n = n
        self.terms = {k: v for k, v in terms.items() if v != 0}
        self._ordered = None

    def ordered_entries(self) -> list:
        if self._ordered is None:
            from itertools import permutations

            out = []
            for skey, val in sorted(
                self.terms.items(), key=lambda kv: tuple(index_sort_key(i) for i in kv[0])
            ):
                seen = set()
                for perm in permutations(skey):
                    if perm not in seen:
                        seen.add(perm)
                        out.append((perm, val))
            self._ordered = out
        return self._ordered

    def _value_tables(self, pts, derivative_slots):
        """Per-slot lookup tables of basis (or basis-derivative) values."""
        universe = set()
        for key in self.terms:
            universe.update(key)
        tables = []
        for s, v in enumerate(pts):
            fn = (
                function_basis_derivative_value
                if s in derivative_slots
                else function_basis_value
            )
            tables.append({idx: fn(idx[0], idx[1], v) for idx in universe})
        return tables

    def _contract(self, points, derivative_slots):
        pts = [rat(v) for v in points]
        tables = self._value_tables(pts, derivative_slots)
        acc = QZERO
        for okey, c in self.ordered_entries():
            prod = c
            for s, idx in enumerate(okey):
                prod *= tables[s][idx]
            acc += prod
        return acc

    def evaluate(self, points):
        return self._contract(points, frozenset())

    def partial_value(self, slot: int, points):
        """d/dz_slot of the potential, evaluated at rational points."""
        return self._contract(points, frozenset((slot,)))

    def mixed_second_value(self, points):
        """d^2/dz_1 dz_2 of the potential at rational points (slots 0 and 1)."""
        return self._contract(points, frozenset((0, 1)))

    def max_order(self) -> int:
        best = 0
        for key in self.terms:
            for _, k in key:
                best = max(best, k)
        return best

    def __eq__(self, other):
        if not isinstance(other, FreeEnergy):
            return NotImplemented
        return (self.g, self.n, self.terms) == (other.g, other.n, other.terms)

    def __repr__(self):
        return f"FreeEnergy(g={self.g}, n={self.n}, {len(self.terms)} terms)"


def integrate_correlator(curve: SpectralCurve, corr: Correlator) -> FreeEnergy:
    """Slot-wise antiderivative with zero constants, then normalization check.

    A simple pole in any slot would require a logarithm and aborts; in exact
    mode the per-slot sheet antisymmetry (the fiber-normalization condition)
    is then verified exactly and certifies the zero constants.
    """
    out: dict = {}
    for key, c in corr.terms.items():
        factor = QONE
        new_key = []
        for q, k in key:
            if k <= 1:
                raise LogarithmicTermError(
                    f"correlator ({corr.g},{corr.n}) has a simple pole at {point_str(q)}"
                )
            factor *= -QONE / (k - 1)
            new_key.append((q, k - 1))
        out[sort_indices(tuple(new_key))] = c * factor
    fe = FreeEnergy(corr.g, corr.n, out)
    if curve.mode == EXACT:
        _check_fiber_normalization(curve, fe)
    return fe


def _check_fiber_normalization(curve: SpectralCurve, fe: FreeEnergy):
    const_marker = ("const", 0)
    for slot in range(fe.n):
        acc: dict = {}

        def add(key, val):
            if val != 0:
                acc[key] = acc.get(key, QZERO) + val

        for okey, c in fe.ordered_entries():
            add(okey, c)
            terms, const = curve.function_pullback(*okey[slot])
            for idx, w in terms.items():
                add(okey[:slot] + (idx,) + okey[slot + 1 :], c * w)
            if const != 0:
                add(okey[:slot] + (const_marker,) + okey[slot + 1 :], c * const)
        bad = {k: v for k, v in acc.items() if v != 0}
        if bad:
            hint = ""
            if curve.involution is not None and curve.involution.apply(INF) is not INF:
                # pullbacks along an involution that moves infinity acquire
                # constant parts, which the pole-basis representation of the
                # potentials deliberately excludes
                hint = (
                    "; the sheet involution does not fix infinity, so the "
                    "normalized potential needs constants outside the pole "
                    "basis -- reparametrize so the involution is affine"
                )
            raise NormalizationError(
                f"fiber sum of potential ({fe.g},{fe.n}) does not vanish "
                f"in slot {slot + 1}{hint}"
            )


@dataclass
class FreeEnergyTable:
    """Store of potentials, filled from a correlator table level by level."""

    curve: SpectralCurve
    entries: dict = field(default_factory=dict)

    def has(self, g: int, n: int) -> bool:
        return (g, n) in self.entries

    def f(self, g: int, n: int) -> FreeEnergy:
        if (g, n) == (0, 2):
            raise UnsupportedOperationError(
                "the (0,2) potential is deliberately not constructed; "
                "its role is played by the first-order expansion data"
            )
        if (g, n) in ((0, 1),):
            raise UnsupportedOperationError(
                "the (0,1) potential is multivalued; only its differential exists"
            )
        if (g, n) not in self.entries:
            raise IncompleteTableError(f"potential ({g},{n}) has not been computed")
        return self.entries[(g, n)]

    def store(self, fe: FreeEnergy):
        self.entries[(fe.g, fe.n)] = fe

    def fill_from(self, table: CorrelatorTable):
        for (g, n) in sorted(table.entries, key=lambda gn: (2 * gn[0] - 2 + gn[1], gn)):
            if not self.has(g, n):
                self.store(integrate_correlator(self.curve, table.w(g, n)))
        return self

    def max_level(self) -> int:
        if not self.entries:
            return 0
        return max(2 * g - 2 + n for g, n in self.entries)


def diagonal_specialize(fe: FreeEnergy, derivative_slots: int = 0) -> RationalFunction:
    """Principal specialization of a potential as a one-variable function.

    ``derivative_slots = 0`` returns F(z, ..., z); ``1`` returns
    ``n * [d/du F(u, z, .., z)] at u = z`` (the full diagonal derivative);
    ``2`` returns ``n (n-1) * [d^2/du1 du2 F(u1, u2, z, ..)]`` at the
    diagonal, the mixed part of the second diagonal derivative.
    """
    n = fe.n
    prod_cache: dict = {}

    def basis_prod(indices) -> RationalFunction:
        key = tuple(indices)
        if key not in prod_cache:
            acc = RationalFunction.const(1)
            for q, k in key:
                acc = acc * _basis_rf(q, k)
            prod_cache[key] = acc
        return prod_cache[key]

    total = RationalFunction.zero()
    if derivative_slots == 0:
        for key, c in fe.terms.items():
            total = total + c * _multiset_permutation_count(key) * basis_prod(key)
        return total
    if derivative_slots == 1:
        for key, c in fe.terms.items():
            distinct = sorted(set(key), key=index_sort_key)
            for e in distinct:
                rest = list(key)
                rest.remove(e)
                weight = c * _multiset_permutation_count(tuple(rest))
                total = total + weight * _basis_rf(*e).derivative() * basis_prod(rest)
        return n * total
    if derivative_slots == 2:
        if n < 2:
            return RationalFunction.zero()
        for key, c in fe.terms.items():
            distinct = sorted(set(key), key=index_sort_key)
            for e1 in distinct:
                for e2 in distinct:
                    rest = list(key)
                    rest.remove(e1)
                    if e2 not in rest:
                        continue
                    rest.remove(e2)
                    weight = c * _multiset_permutation_count(tuple(rest))
                    total = total + (
                        weight
                        * _basis_rf(*e1).derivative()
                        * _basis_rf(*e2).derivative()
                        * basis_prod(rest)
                    )
        return n * (n - 1) * total
    raise ValueError("derivative_slots must be 0, 1 or 2")


# ---------------------------------------------------------------------------
# the differential-recursion cross path
# ---------------------------------------------------------------------------


def _check_sample(curve: SpectralCurve, sample):
    h = curve.ydx.fn
    pts = [rat(v) for v in sample]
    ram = {point_str(r.location) for r in curve.ram_points}
    for i, v in enumerate(pts):
        if point_str(v) in ram:
            raise BadSampleError(f"sample slot {i + 1} hits a ramification point")
        if h.den.evaluate(v) == 0 or h.evaluate(v) == 0:
            raise BadSampleError(f"sample slot {i + 1} hits a zero or pole of y dx")
    for i in range(len(pts)):
        for j in range(len(pts)):
            if i != j and pts[i] == pts[j]:
                raise BadSampleError("sample has coincident coordinates")
            sv = curve.involution.apply(pts[j])
            if i != j and sv is not INF and pts[i] == sv:
                raise BadSampleError("sample has sheet-conjugate coordinates")
    return pts


def df_via_differential_recursion(
    curve: SpectralCurve, ftable: FreeEnergyTable, g: int, n: int, sample
):
    """Coefficient of dz_1 of the differential recursion's right side.

    Exact evaluation at a rational sample tuple; the caller compares with
    the slot-1 derivative of the stored potential.  Stated for levels >= 2;
    the (1,1) case degenerates to the pair-correlator closed form (its
    handle term is the first-order data itself), which is evaluated here
    through the pole-basis projection.  The (0,3) case has no potential-only
    right side (it would need the excluded (0,2) potential) and is rejected.
    """
    curve._require_exact()
    level = 2 * g - 2 + n
    pts = _check_sample(curve, sample)
    if len(pts) != n:
        raise BadSampleError("sample width does not match n")
    h = curve.ydx.fn
    if (g, n) == (1, 1):
        closed = bergman_sigma_diagonal(curve) / (2 * h)
        projected = curve.project_form(closed)
        z1 = pts[0]
        acc = QZERO
        for (q, k), c in sorted(projected.items(), key=lambda kv: index_sort_key(kv[0])):
            acc += c * form_basis_value(q, k, z1)
        return acc
    if (g, n) == (0, 3):
        raise UnsupportedOperationError(
            "the differential recursion starts one level above (0,3); "
            "use the contracted closed form of the triple correlator instead"
        )
    if level < 2:
        raise UnsupportedOperationError("differential recursion needs level >= 2")

    sigma = curve.involution
    z1 = pts[0]
    total = QZERO

    # pair terms over the marked slots
    lower = ftable.f(g, n - 1) if n >= 2 else None
    for j in range(2, n + 1):
        vj = pts[j - 1]
        sj = sigma.apply(vj)
        om = QONE / (z1 - vj)
        if sj is not INF:
            om -= QONE / (z1 - sj)
        rest = [z1] + [pts[i - 1] for i in range(2, n + 1) if i != j]
        d1 = lower.partial_value(0, rest)
        tail = pts[1:]
        dj = lower.partial_value(j - 2, tail)
        total -= om / (2 * h.evaluate(z1)) * d1 - om * dj / (2 * h.evaluate(vj))

    # handle term and stable splittings, contracted at the first slot
    inner = QZERO
    if g >= 1:
        if (g - 1, n + 1) == (0, 2):
            raise UnsupportedOperationError("unexpected unstable handle term")
        upper = ftable.f(g - 1, n + 1)
        inner += upper.mixed_second_value([z1, z1] + pts[1:])
    others = list(range(2, n + 1))
    for g1 in range(g + 1):
        g2 = g - g1
        for isize in range(n):
            if not (2 * g1 - 1 + isize > 0 and 2 * g2 - 1 + (n - 1 - isize) > 0):
                continue
            fa = ftable.f(g1, isize + 1)
            fb = ftable.f(g2, n - 1 - isize + 1)
            for iset in combinations(others, isize):
                jset = [v for v in others if v not in iset]
                pa = fa.partial_value(0, [z1] + [pts[v - 1] for v in iset])
                pb = fb.partial_value(0, [z1] + [pts[v - 1] for v in jset])
                inner += pa * pb
    total -= inner / (2 * h.evaluate(z1))
    return total


def verify_free_energies(
    ftable: FreeEnergyTable,
    table: CorrelatorTable,
    samples: int = 20,
    seed: int = 1729,
):
    """Round trip, normalization, diagonal pole orders, and the cross path.

    Raises on the first failure; returns a list of (g, n, check) triples on
    success.  The cross path compares the differential recursion's right
    side with the slot-1 derivative of the stored potential at seeded
    rational samples -- exact equality, no tolerance.  Level-1 entries are
    covered by their dedicated closed-form checks during construction.
    """
    curve = ftable.curve
    done = []
    for (g, n) in sorted(ftable.entries, key=lambda gn: (2 * gn[0] - 2 + gn[1], gn)):
        fe = ftable.f(g, n)
        corr = table.w(g, n)

        # differentiating every slot returns the correlator, term by term
        rebuilt: dict = {}
        for key, c in fe.terms.items():
            factor = QONE
            new_key = []
            for q, k in key:
                factor *= -k
                new_key.append((q, k + 1))
            rebuilt[sort_indices(tuple(new_key))] = c * factor
        if rebuilt != corr.terms:
            raise InvariantViolationError(
                f"round trip failed: differential of potential ({g},{n}) "
                "does not reproduce the correlator"
            )
        done.append((g, n, "round-trip"))

        # diagonal pole order at every active point
        diag = diagonal_specialize(fe, 0)
        expected = 6 * g - 6 + 3 * n
        for p in curve.active_points():
            got = -diag.order_at(p)
            if got != expected:
                raise InvariantViolationError(
                    f"diagonal pole order of potential ({g},{n}) at "
                    f"{point_str(p)} is {got}, expected {expected}"
                )
        done.append((g, n, "diagonal-pole-order"))

        if curve.mode == EXACT and 2 * g - 2 + n >= 2:
            stream = _sample_stream(curve, seed=seed + 101 * g + n, count=samples, width=n)
            for tup in stream:
                lhs = fe.partial_value(0, tup)
                rhs = df_via_differential_recursion(curve, ftable, g, n, tup)
                if lhs != rhs:
                    raise InternalConsistencyError(
                        f"differential recursion mismatch at ({g},{n}), "
                        f"sample {tuple(map(rat_str, tup))}"
                    )
            done.append((g, n, "differential-recursion"))
        elif curve.mode == EXACT and (g, n) == (1, 1):
            stream = _sample_stream(curve, seed=seed, count=samples, width=1)
            for tup in stream:
                lhs = fe.partial_value(0, tup)
                rhs = df_via_differential_recursion(curve, ftable, 1, 1, tup)
                if lhs != rhs:
                    raise InternalConsistencyError(
                        f"closed-form mismatch for the (1,1) potential at {rat_str(tup[0])}"
                    )
            done.append((g, n, "differential-recursion"))
    return done
