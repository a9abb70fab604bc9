"""Exact rational scalars and the point at infinity.

Every coefficient in the engine is an exact rational number.  We use
``gmpy2.mpq`` (noticeably faster than ``fractions.Fraction`` on the
accumulation-heavy inner loops) but accept anything Fraction-like on input.
"""

from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq

Q = mpq

QZERO = Q(0)
QONE = Q(1)


def rat(value, den=None) -> Q:
    """Coerce ``value`` (int, str "p/q", Fraction, mpq) to an mpq."""
    if den is not None:
        return Q(value, den)
    if isinstance(value, (mpq, int)):
        return Q(value)
    if isinstance(value, Fraction):
        return Q(value.numerator, value.denominator)
    if isinstance(value, str):
        return Q(value)
    if isinstance(value, float):
        raise TypeError("floating-point input is not accepted; pass an exact rational")
    return Q(value)


def rat_str(q) -> str:
    """Canonical string form: "p" for integers, "p/q" otherwise."""
    q = Q(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class _Infinity:
    """Singleton marker for the point z = infinity on the parameter line."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def point_str(p) -> str:
    """Serialize a pole location (rational or the point at infinity)."""
    if p is INF:
        return "inf"
    return rat_str(p)


def parse_point(text: str):
    """Inverse of :func:`point_str`."""
    if text == "inf":
        return INF
    return rat(text)


def point_sort_key(p):
    """Total order on pole locations: finite points by value, infinity last."""
    if p is INF:
        return (1, QZERO)
    return (0, p)
