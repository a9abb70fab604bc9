"""Residue recursion for the symmetric correlation differentials.

A stable correlator ``W(g, n)`` is stored as a fully symmetric tensor over
the pole basis: slot index ``(q, k)`` stands for the 1-form
``dz/(z - q)^k`` at an active ramification point ``q`` (``dw/w^k`` in the
``w = 1/z`` chart when ``q`` is the point at infinity).

Each recursion step extracts, at every active point, the residue of the
kernel-weighted bracket of lower correlators.  The first slot's dependence
enters through the expansion of the third-kind kernel, the remaining slots
through stored tensors and the expansion of the second-kind kernel; both
expansions produce pole-basis indices, so the representation is closed.

The two unstable cases are kept out of the store: ``W(0,1)`` is the curve
form ``y dx`` and ``W(0,2)`` is the second-kind kernel itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from ._rat import INF, Q, QONE, QZERO, point_sort_key, point_str, rat, rat_str
from .algebra import (
    LaurentSeries,
    RationalFunction,
    compose_rf_mobius,
    series_expand,
)
from .curve import (
    EXACT,
    SERIES,
    RecursionKernel,
    SpectralCurve,
    bergman_sigma_diagonal,
)
from .errors import (
    DegenerateCurveError,
    IncompleteTableError,
    InsufficientOrderError,
    InternalConsistencyError,
    InvariantViolationError,
    UnsupportedOperationError,
)

__all__ = [
    "Correlator",
    "CorrelatorTable",
    "unstable_forms",
    "compute_w11",
    "compute_w03",
    "compute_wgn",
    "verify_correlators",
    "form_basis_value",
    "index_sort_key",
    "pole_order_bound",
]


def index_sort_key(idx):
    point, order = idx
    return point_sort_key(point) + (order,)


def sort_indices(key: tuple) -> tuple:
    return tuple(sorted(key, key=index_sort_key))


def form_basis_value(q, k: int, v):
    """Coefficient of dz at z = v of the order-k basis form at q."""
    v = rat(v)
    if q is INF:
        return -(v ** (k - 2))
    return QONE / (v - q) ** k


def pole_order_bound(g: int, n: int) -> int:
    """Asserted per-slot pole-order bound for a stable correlator."""
    return 2 * (3 * g - 2 + n)


def _multiset_permutation_count(key: tuple) -> int:
    from math import factorial

    count = factorial(len(key))
    seen: dict = {}
    for idx in key:
        seen[idx] = seen.get(idx, 0) + 1
    for m in seen.values():
        count //= factorial(m)
    return count


class Correlator:
    """Fully symmetric pole-basis tensor for one stable (g, n)."""

    def __init__(self, g: int, n: int, terms: dict):
        self.g = g
        self.n = n
        self.terms = {k: v for k, v in terms.items() if v != 0}
        self._ordered: Optional[list] = None

    @classmethod
    def from_ordered(cls, g: int, n: int, raw: dict) -> "Correlator":
        """Canonicalize an ordered-key tensor, verifying full symmetry."""
        canonical: dict = {}
        buckets: dict = {}
        for okey, val in raw.items():
            buckets.setdefault(sort_indices(okey), {})[okey] = val
        for skey, variants in buckets.items():
            vals = {v for v in variants.values()}
            expected = _multiset_permutation_count(skey)
            if len(vals) != 1 or len(variants) != expected:
                nonzero = {k: v for k, v in variants.items() if v != 0}
                if not nonzero:
                    continue
                raise InternalConsistencyError(
                    f"correlator ({g},{n}) is not permutation symmetric at "
                    f"{_key_str(skey)}"
                )
            val = vals.pop()
            if val != 0:
                canonical[skey] = val
        return cls(g, n, canonical)

    def ordered_entries(self) -> list:
        """All distinct ordered index tuples with their (common) coefficient."""
        if self._ordered is None:
            from itertools import permutations

            out = []
            for skey, val in sorted(self.terms.items(), key=_tensor_key):
                seen = set()
                for perm in permutations(skey):
                    if perm not in seen:
                        seen.add(perm)
                        out.append((perm, val))
            self._ordered = out
        return self._ordered

    def max_order(self) -> int:
        best = 0
        for key in self.terms:
            for _, k in key:
                best = max(best, k)
        return best

    def support(self) -> set:
        pts = set()
        for key in self.terms:
            for q, _ in key:
                pts.add(q)
        return pts

    def evaluate(self, points) -> Q:
        """Coefficient with respect to the product of dz_i at rational points."""
        if len(points) != self.n:
            raise ValueError("wrong number of evaluation points")
        pts = [rat(v) for v in points]
        cache: dict = {}

        def val(idx, slot):
            key = (idx, slot)
            if key not in cache:
                cache[key] = form_basis_value(idx[0], idx[1], pts[slot])
            return cache[key]

        acc = QZERO
        for okey, c in self.ordered_entries():
            prod = c
            for slot, idx in enumerate(okey):
                prod *= val(idx, slot)
            acc += prod
        return acc

    def __eq__(self, other):
        if not isinstance(other, Correlator):
            return NotImplemented
        return (self.g, self.n, self.terms) == (other.g, other.n, other.terms)

    def __repr__(self):
        return f"Correlator(g={self.g}, n={self.n}, {len(self.terms)} terms)"


def _tensor_key(item):
    key = item[0]
    return tuple(index_sort_key(idx) for idx in key)


def _key_str(key: tuple) -> str:
    return "[" + ", ".join(f"({point_str(q)},{k})" for q, k in key) + "]"


def unstable_forms(curve: SpectralCurve):
    """The two unstable pieces: the curve 1-form and the second-kind kernel.

    They are returned as (OneForm, marker) and never enter the tensor store;
    the recursion references them directly.
    """
    return curve.ydx, "second-kind-kernel"


# ---------------------------------------------------------------------------
# the residue engine
# ---------------------------------------------------------------------------


class _ChartEngine:
    """Cached Laurent windows at one active point, at a fixed truncation."""

    def __init__(self, curve: SpectralCurve, point, trunc: int):
        self.curve = curve
        self.point = point
        self.trunc = trunc
        self.chart = curve.chart(point)
        self.kernel = RecursionKernel(curve, point)
        inv_den = self.kernel.inverse_denominator_series(trunc)
        self.sigma = self.chart.sigma_series(trunc + 2)
        self.sigma_prime = self.sigma.derivative()
        # kernel factors: ker[m] pairs with the slot-1 index (point, m+1)
        self.ker: list = [None]
        for m in range(1, trunc + 2):
            num = self.kernel.numerator_term_series(m, trunc)
            self.ker.append(num * inv_den if num.leading_order() is not None else None)
        self._phi: dict = {}
        self._phi_sigma: dict = {}
        self._sigma_pows: list = [LaurentSeries.make(QZERO, 0, [QONE], trunc)]

    # -- basis expansions

    def phi(self, idx) -> LaurentSeries:
        if idx not in self._phi:
            q, k = idx
            same = (q is INF and self.point is INF) or (
                q is not INF and self.point is not INF and q == self.point
            )
            if same:
                ser = LaurentSeries.make(QZERO, -k, [QONE], self.trunc)
            else:
                ser = series_expand(self.chart.basis_form_chart_rf(q, k), QZERO, self.trunc)
            self._phi[idx] = ser
        return self._phi[idx]

    def phi_sigma(self, idx) -> LaurentSeries:
        """Pullback of a basis form along the local involution, expanded."""
        if idx not in self._phi_sigma:
            q, k = idx
            if self.curve.mode == EXACT:
                mob = self.chart.sigma_mobius()
                rf = self.chart.basis_form_chart_rf(q, k)
                pulled = compose_rf_mobius(rf, mob) * mob.derivative_rf()
                ser = series_expand(pulled, QZERO, self.trunc)
            else:
                base = self.phi(idx)
                same = q is not INF and self.point is not INF and q == self.point
                if same:
                    ser = self.sigma.power(-k) * self.sigma_prime
                else:
                    outer = series_expand(
                        self.chart.basis_form_chart_rf(q, k), QZERO, self.trunc
                    )
                    ser = outer.compose(self.sigma) * self.sigma_prime
                ser = ser.truncate(self.trunc)
            self._phi_sigma[idx] = ser
        return self._phi_sigma[idx]

    def sigma_pow(self, m: int) -> LaurentSeries:
        while len(self._sigma_pows) <= m:
            self._sigma_pows.append(self._sigma_pows[-1] * self.sigma)
        return self._sigma_pows[m]

    def second_kind_diagonal(self) -> LaurentSeries:
        """Window of sigma'(zeta)/(zeta - sigma(zeta))^2."""
        mono = LaurentSeries.make(QZERO, 1, [QONE], self.trunc + 4)
        diff = mono - self.sigma
        return (self.sigma_prime * diff.power(2).inverse()).truncate(self.trunc)


def _coeff_of_product(a: LaurentSeries, b: LaurentSeries, target: int):
    """Coefficient of zeta^target in a*b, without forming the product."""
    lo = max(a.min_degree, target - (b.truncation_order - 1))
    hi = min(a.truncation_order - 1, target - b.min_degree)
    acc = QZERO
    for k in range(lo, hi + 1):
        av = a.coeff(k)
        if av != 0:
            bv = b.coeff(target - k)
            if bv != 0:
                acc += av * bv
    return acc


@dataclass
class CorrelatorTable:
    """Level-ordered store of stable correlators for one curve."""

    curve: SpectralCurve
    entries: dict = field(default_factory=dict)

    def has(self, g: int, n: int) -> bool:
        return (g, n) in self.entries

    def w(self, g: int, n: int) -> Correlator:
        if (g, n) in ((0, 1), (0, 2)):
            raise UnsupportedOperationError(
                "unstable pieces are not stored as tensors; use unstable_forms"
            )
        if (g, n) not in self.entries:
            raise IncompleteTableError(f"correlator ({g},{n}) has not been computed")
        return self.entries[(g, n)]

    def store(self, corr: Correlator):
        self.entries[(corr.g, corr.n)] = corr

    def level_entries(self, level: int) -> list:
        return [gn for gn in sorted(self.entries) if 2 * gn[0] - 2 + gn[1] == level]

    def fill(self, level_max: int):
        """Compute every stable correlator with 2g - 2 + n <= level_max."""
        for level in range(1, level_max + 1):
            for g, n in stable_pairs(level):
                if not self.has(g, n):
                    if (g, n) == (1, 1):
                        self.store(compute_w11(self.curve))
                    elif (g, n) == (0, 3):
                        self.store(compute_w03(self.curve))
                    else:
                        self.store(compute_wgn(self, g, n))
        return self


def stable_pairs(level: int) -> list:
    """All stable (g, n) with 2g - 2 + n equal to ``level``, g then n sorted."""
    out = []
    g = 0
    while True:
        n = level + 2 - 2 * g
        if n < 1:
            break
        if 2 * g - 2 + n > 0:
            out.append((g, n))
        g += 1
    return sorted(out)


def _trunc_for(curve: SpectralCurve, *korders: int) -> int:
    base = 2 * max([4, *korders]) + 10
    return ((base + 7) // 8) * 8


def _active_engines(curve: SpectralCurve, trunc: int) -> list:
    actives = curve.active_points()
    if not actives:
        raise DegenerateCurveError("curve has no active ramification points")
    return [_ChartEngine(curve, p, trunc) for p in actives]


def _halved(raw: dict) -> dict:
    half = Q(1, 2)
    return {k: v * half for k, v in raw.items() if v != 0}


def compute_w11(curve: SpectralCurve) -> Correlator:
    """W(1,1) by residue extraction, cross-checked against its closed form.

    The closed form is the second-kind kernel pulled back along the sheet
    involution, contracted with 1/(2 y dx); in exact mode the two paths must
    agree term by term.
    """
    trunc = _trunc_for(curve, 4)
    raw: dict = {}
    for eng in _active_engines(curve, trunc):
        bss = eng.second_kind_diagonal()
        for m1 in range(1, len(eng.ker)):
            ker = eng.ker[m1]
            if ker is None:
                continue
            c = _coeff_of_product(bss, ker, -1)
            if c != 0:
                raw[((eng.point, m1 + 1),)] = raw.get(((eng.point, m1 + 1),), QZERO) + c
    corr = Correlator.from_ordered(1, 1, _halved(raw))
    if curve.mode == EXACT:
        closed = bergman_sigma_diagonal(curve) / (2 * curve.ydx.fn)
        projected = curve.project_form(closed)
        closed_terms = {(idx,): v for idx, v in projected.items() if v != 0}
        if closed_terms != corr.terms:
            raise InternalConsistencyError(
                "W(1,1): residue extraction and closed form disagree"
            )
    return corr


def compute_w03(curve: SpectralCurve, samples: int = 20) -> Correlator:
    """W(0,3) by residue extraction, checked against the contracted closed form.

    The closed-form cross-check is pointwise at seeded rational samples; the
    residue path is manifestly diagonal-free, so agreement also certifies
    that no diagonal poles survive in the closed form.
    """
    trunc = _trunc_for(curve, 4)
    raw: dict = {}
    for eng in _active_engines(curve, trunc):
        # bracket: B(zeta, z_2) B(sigma zeta, z_3) + (2 <-> 3)
        for m1 in range(1, len(eng.ker)):
            ker = eng.ker[m1]
            if ker is None:
                continue
            ker_lead = ker.leading_order()
            if ker_lead is None:
                continue
            for m3 in range(0, trunc):
                bs = eng.sigma_pow(m3) * eng.sigma_prime  # pairs with order m3+2
                bs_lead = bs.leading_order()
                if bs_lead is None or bs_lead + ker_lead > -1:
                    continue
                for m2 in range(0, trunc):
                    c = _coeff_of_product(bs, ker, -1 - m2)
                    if c == 0:
                        continue
                    c *= (m2 + 1) * (m3 + 1)
                    i1 = (eng.point, m1 + 1)
                    i2 = (eng.point, m2 + 2)
                    i3 = (eng.point, m3 + 2)
                    for key in (((i1, i2, i3)), ((i1, i3, i2))):
                        raw[key] = raw.get(key, QZERO) + c
    corr = Correlator.from_ordered(0, 3, _halved(raw))
    if curve.mode == EXACT:
        _check_w03_closed_form(curve, corr, samples)
    return corr


def _w03_closed_form_value(curve: SpectralCurve, a1, a2, a3):
    """Pointwise value of the contracted closed form for W(0,3)."""
    sig = curve.involution
    sig_rf = sig.as_rf()
    sig_d = sig.derivative_rf()
    h = curve.ydx.fn

    def s(v):
        return sig.apply(v)

    a1, a2, a3 = rat(a1), rat(a2), rat(a3)
    first = (
        QONE / (a1 - a2) ** 2 * sig_d.evaluate(a3) / (a1 - s(a3)) ** 2
        + QONE / (a1 - a3) ** 2 * sig_d.evaluate(a2) / (a1 - s(a2)) ** 2
    ) / (2 * h.evaluate(a1))

    z = RationalFunction.variable()

    # slot-2 derivative term: d/dz2 of omega(z1; sigma(z2), z2) * C(z2, z3)
    om2 = QONE / (a1 - sig_rf) - QONE / (a1 - z)
    c2 = sig_d.evaluate(a3) / ((z - s(a3)) ** 2 * 2 * h)
    second = (om2 * c2).derivative().evaluate(a2)

    # slot-3 derivative term
    om3 = QONE / (a1 - sig_rf) - QONE / (a1 - z)
    c3 = sig_d / ((rat(a2) - sig_rf) ** 2 * 2 * h)
    third = (om3 * c3).derivative().evaluate(a3)

    return first + second + third


def _sample_stream(curve: SpectralCurve, seed: int, count: int, width: int = 1):
    """Deterministic rational samples avoiding the excluded loci."""
    import random

    rng = random.Random(seed)
    bad = set()
    for r in curve.ram_points:
        if r.location is not INF:
            bad.add(r.location)
    h = curve.ydx.fn
    out = []
    while len(out) < count:
        tup = []
        ok = True
        for _ in range(width):
            v = Q(rng.randint(-60, 60), rng.randint(1, 12))
            if v in bad or any(v == u for u in tup):
                ok = False
                break
            if h.den.evaluate(v) == 0 or h.evaluate(v) == 0:
                ok = False
                break
            if curve.mode == EXACT:
                sv = curve.involution.apply(v)
                if sv is INF or any(sv == u for u in tup):
                    ok = False
                    break
            tup.append(v)
        if ok:
            out.append(tuple(tup))
    return out


def _check_w03_closed_form(curve: SpectralCurve, corr: Correlator, samples: int):
    for tup in _sample_stream(curve, seed=193, count=samples, width=3):
        lhs = corr.evaluate(tup)
        rhs = _w03_closed_form_value(curve, *tup)
        if lhs != rhs:
            raise InternalConsistencyError(
                f"W(0,3): residue path and closed form disagree at {tuple(map(rat_str, tup))}"
            )


def compute_wgn(table: CorrelatorTable, g: int, n: int) -> Correlator:
    """General stable correlator via the kernel-weighted residue bracket.

    Requires every lower-level correlator; level one has its own entry
    points (the bracket shape differs there).
    """
    level = 2 * g - 2 + n
    if level < 1:
        raise UnsupportedOperationError("unstable range requested")
    if (g, n) == (1, 1):
        return compute_w11(table.curve)
    if (g, n) == (0, 3):
        return compute_w03(table.curve)
    curve = table.curve

    needed = []
    if n >= 2:
        needed.append((g, n - 1))
    if g >= 1:
        needed.append((g - 1, n + 1))
    for g1 in range(g + 1):
        for sz in range(n):
            if _stable(g1, sz + 1) and _stable(g - g1, n - 1 - sz + 1):
                needed.append((g1, sz + 1))
    for gn in needed:
        if not table.has(*gn):
            raise IncompleteTableError(
                f"correlator {gn} required for ({g},{n}) is missing"
            )

    kmax = 4
    for gn in needed:
        kmax = max(kmax, table.w(*gn).max_order())
    trunc = _trunc_for(curve, kmax, pole_order_bound(g, n) // 2)

    raw: dict = {}
    for eng in _active_engines(curve, trunc):
        _accumulate_point(raw, table, eng, g, n)
    result = Correlator.from_ordered(g, n, _halved(raw))
    if curve.mode == SERIES:
        _series_stability_check(table, g, n, result, trunc)
    return result


def _stable(g: int, n: int) -> bool:
    return 2 * g - 2 + n > 0


def _series_stability_check(table, g, n, result, trunc):
    """Doubling the truncation must not change any reported coefficient."""
    curve = table.curve
    raw: dict = {}
    for eng in _active_engines(curve, 2 * trunc):
        _accumulate_point(raw, table, eng, g, n)
    redo = Correlator.from_ordered(g, n, _halved(raw))
    if redo.terms != result.terms:
        raise InsufficientOrderError(
            f"correlator ({g},{n}) changed under order doubling", trunc
        )


def _accumulate_point(raw, table, eng, g, n):
    """Add this point's residue contributions for (g, n) into raw."""
    point = eng.point
    nker = len(eng.ker)
    vars_rest = list(range(2, n + 1))

    def add(key, val):
        if val != 0:
            raw[key] = raw.get(key, QZERO) + val

    # -- pair-branch terms: the second-kind kernel against W(g, n-1)
    if n >= 2 and _stable(g, n - 1):
        lower = table.w(g, n - 1)
        # value tables keyed by the consumed slot's basis index
        tabA: dict = {}
        tabB: dict = {}
        for idx in _slot_universe(lower):
            prodsA = []
            prodsB = []
            phis = eng.phi_sigma(idx)
            phip = eng.phi(idx)
            for m1 in range(1, nker):
                ker = eng.ker[m1]
                prodsA.append(None if ker is None else (phis * ker))
                prodsB.append(None if ker is None else (phip * ker))
            tabA[idx] = prodsA
            tabB[idx] = prodsB
        bsig = [eng.sigma_pow(m) * eng.sigma_prime for m in range(eng.trunc)]

        for okey, c in lower.ordered_entries():
            i0, irest = okey[0], okey[1:]
            prodsA = tabA[i0]
            prodsB = tabB[i0]
            for jpos, j in enumerate(vars_rest):
                others = vars_rest[:jpos] + vars_rest[jpos + 1 :]
                base = dict(zip(others, irest))
                for m1 in range(1, nker):
                    pA = prodsA[m1 - 1]
                    if pA is not None:
                        # variant A: second-kind(z, z_j) x lower(sigma z, ...)
                        mmax = -1 - pA.min_degree
                        for m in range(0, mmax + 1):
                            coef = _series_coeff(pA, -1 - m)
                            if coef != 0:
                                base[j] = (point, m + 2)
                                key = ((point, m1 + 1),) + tuple(
                                    base[v] for v in vars_rest
                                )
                                add(key, c * (m + 1) * coef)
                    pB = prodsB[m1 - 1]
                    if pB is not None:
                        # variant B: second-kind(sigma z, z_j) x lower(z, ...)
                        mmax = -1 - pB.min_degree
                        for m in range(0, min(mmax + 1, eng.trunc)):
                            coef = _coeff_of_product(pB, bsig[m], -1)
                            if coef != 0:
                                base[j] = (point, m + 2)
                                key = ((point, m1 + 1),) + tuple(
                                    base[v] for v in vars_rest
                                )
                                add(key, c * (m + 1) * coef)
                base.pop(j, None)

    # -- handle-glue term: W(g-1, n+1)(z, sigma z, rest)
    if g >= 1:
        lower = table.w(g - 1, n + 1)
        pair_tab: dict = {}
        for okey, c in lower.ordered_entries():
            i0, i1, irest = okey[0], okey[1], okey[2:]
            vals = pair_tab.get((i0, i1))
            if vals is None:
                prod = eng.phi(i0) * eng.phi_sigma(i1)
                vals = []
                for m1 in range(1, nker):
                    ker = eng.ker[m1]
                    vals.append(
                        QZERO if ker is None else _coeff_of_product(prod, ker, -1)
                    )
                pair_tab[(i0, i1)] = vals
            for m1 in range(1, nker):
                coef = vals[m1 - 1]
                if coef != 0:
                    key = ((point, m1 + 1),) + irest
                    add(key, c * coef)

    # -- stable splittings
    for g1 in range(g + 1):
        g2 = g - g1
        for isize in range(n):
            if not (_stable(g1, isize + 1) and _stable(g2, n - 1 - isize + 1)):
                continue
            wa = table.w(g1, isize + 1)
            wb = table.w(g2, n - 1 - isize + 1)
            pair_tab: dict = {}
            combos = list(combinations(vars_rest, isize))
            ea = wa.ordered_entries()
            eb = wb.ordered_entries()
            for iset in combos:
                jset = tuple(v for v in vars_rest if v not in iset)
                for keyA, ca in ea:
                    a0, arest = keyA[0], keyA[1:]
                    for keyB, cb in eb:
                        b0, brest = keyB[0], keyB[1:]
                        vals = pair_tab.get((a0, b0))
                        if vals is None:
                            prod = eng.phi(a0) * eng.phi_sigma(b0)
                            vals = []
                            for m1 in range(1, nker):
                                ker = eng.ker[m1]
                                vals.append(
                                    QZERO
                                    if ker is None
                                    else _coeff_of_product(prod, ker, -1)
                                )
                            pair_tab[(a0, b0)] = vals
                        c = ca * cb
                        assign = dict(zip(iset, arest))
                        assign.update(zip(jset, brest))
                        tail = tuple(assign[v] for v in vars_rest)
                        for m1 in range(1, nker):
                            coef = vals[m1 - 1]
                            if coef != 0:
                                add(((point, m1 + 1),) + tail, c * coef)


def _series_coeff(ser: LaurentSeries, k: int):
    if k < ser.min_degree or k >= ser.truncation_order:
        return QZERO
    return ser.coeffs[k - ser.min_degree]


def _slot_universe(corr: Correlator) -> list:
    seen = set()
    for key in corr.terms:
        seen.update(key)
    return sorted(seen, key=index_sort_key)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    g: int
    n: int
    name: str
    ok: bool
    detail: str = ""


@dataclass
class CorrelatorReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]


def verify_correlators(
    table: CorrelatorTable,
    raise_on_failure: bool = True,
    fiber_tolerance: float = 1e-8,
) -> CorrelatorReport:
    """Structural invariants of every stored correlator.

    Per (g, n): exact permutation symmetry (re-tested by sampling), pole
    support restricted to active points with the per-slot order bound, no
    simple poles, and sheet antisymmetry per slot -- exact through the
    involution pullback in exact mode, numeric over the solved fiber in
    series mode.
    """
    curve = table.curve
    report = CorrelatorReport()

    def record(g, n, name, ok, detail=""):
        report.checks.append(CheckResult(g, n, name, ok, detail))
        if not ok and raise_on_failure:
            raise InvariantViolationError(
                f"{name} violated at ({g},{n})" + (f": {detail}" if detail else "")
            )

    actives = set(point_str(p) for p in curve.active_points())
    for (g, n) in sorted(table.entries):
        corr = table.w(g, n)

        # permutation symmetry, sampled
        sym_ok = True
        detail = ""
        for tup in _sample_stream(curve, seed=977 + 31 * g + n, count=3, width=n):
            base = corr.evaluate(tup)
            rev = corr.evaluate(tuple(reversed(tup)))
            rot = corr.evaluate(tup[1:] + tup[:1])
            if base != rev or base != rot:
                sym_ok = False
                detail = f"at sample {tuple(map(rat_str, tup))}"
                break
        record(g, n, "permutation-symmetry", sym_ok, detail)

        # pole support and order window
        bound = pole_order_bound(g, n)
        support_ok = True
        detail = ""
        for key in corr.terms:
            for q, k in key:
                if point_str(q) not in actives:
                    support_ok = False
                    detail = f"pole at inactive point {point_str(q)}"
                elif k < 2:
                    support_ok = False
                    detail = f"simple pole at {point_str(q)}"
                elif k > bound:
                    support_ok = False
                    detail = f"order {k} exceeds bound {bound} at {point_str(q)}"
        record(g, n, "pole-support", support_ok, detail)

        # per-slot sheet antisymmetry
        if curve.mode == EXACT:
            for slot in range(n):
                acc: dict = {}
                for okey, c in corr.ordered_entries():
                    acc[okey] = acc.get(okey, QZERO) + c
                    pb = curve.form_pullback(*okey[slot])
                    for idx, w in pb.items():
                        nkey = okey[:slot] + (idx,) + okey[slot + 1 :]
                        acc[nkey] = acc.get(nkey, QZERO) + c * w
                bad = {k: v for k, v in acc.items() if v != 0}
                record(
                    g,
                    n,
                    "sheet-antisymmetry",
                    not bad,
                    f"slot {slot + 1}" if bad else "",
                )
        else:
            ok, detail = _numeric_fiber_check(table, corr, fiber_tolerance)
            record(g, n, "sheet-antisymmetry(numeric)", ok, detail)
    return report


def _numeric_fiber_check(table: CorrelatorTable, corr: Correlator, tol: float):
    """Balanced fiber sums at sampled base points, solved numerically."""
    import numpy as np

    curve = table.curve
    x = curve.x
    xprime = x.derivative()
    fills = _sample_stream(curve, seed=421, count=max(corr.n, 1), width=1)
    others = [tup[0] for tup in fills]
    for base_seed in (3, 7, 11):
        x0 = Q(base_seed * 7 + 1, base_seed + 2)
        # roots of num(x) - x0 den(x)
        poly = x.num - x.den * x0
        coeffs = [float(c) for c in reversed(poly.coeffs)]
        roots = np.roots(coeffs)
        if any(abs(_rf_complex(xprime, r)) < 1e-9 for r in roots):
            continue  # x0 is (numerically) a branch value; the sum degenerates
        for slot in range(corr.n):
            total = 0.0 + 0.0j
            scale = 0.0
            for root in roots:
                pts = list(others[: corr.n])
                pts[slot] = root
                val = _complex_eval(corr, pts)
                dzdx = 1.0 / complex(_rf_complex(xprime, root))
                total += val * dzdx
                scale = max(scale, abs(val * dzdx))
            if scale > 0 and abs(total) > tol * scale:
                return False, f"slot {slot + 1}, base x0={rat_str(x0)}, sum={total:.3e}"
    return True, ""


def _rf_complex(f: RationalFunction, v):
    num = 0.0 + 0.0j
    for c in reversed(f.num.coeffs):
        num = num * v + complex(float(c.numerator)) / float(c.denominator)
    den = 0.0 + 0.0j
    for c in reversed(f.den.coeffs):
        den = den * v + complex(float(c.numerator)) / float(c.denominator)
    return num / den


def _complex_eval(corr: Correlator, pts):
    total = 0.0 + 0.0j
    for okey, c in corr.ordered_entries():
        prod = complex(float(c.numerator)) / float(c.denominator)
        for slot, (q, k) in enumerate(okey):
            v = complex(pts[slot])
            if q is INF:
                prod *= -(v ** (k - 2))
            else:
                prod *= 1.0 / (v - complex(float(q.numerator) / float(q.denominator))) ** k
        total += prod
    return total
