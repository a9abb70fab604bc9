"""Canonical JSON emission and loading.

All rationals are serialized as strings ("p/q", or "p" for integers) so no
consumer can lose precision; term lists are sorted canonically, making the
output byte-identical across runs and platforms.  The point at infinity
serializes as "inf"; orders there are measured in the w = 1/z chart.
"""

from __future__ import annotations

import json

from ._rat import parse_point, point_str, rat, rat_str
from .algebra import format_rational_function
from .curve import SpectralCurve
from .errors import MalformedInputError
from .free_energy import FreeEnergy, FreeEnergyTable
from .recursion import Correlator, CorrelatorTable, index_sort_key
from .wkb import QuantumCurveReport, WKBExpansion

__all__ = [
    "correlator_to_obj",
    "correlators_document",
    "free_energies_document",
    "wkb_document",
    "dumps_canonical",
    "load_correlators",
    "load_free_energies",
]


def _terms_list(terms: dict) -> list:
    out = []
    for key in sorted(terms, key=lambda k: tuple(index_sort_key(i) for i in k)):
        out.append(
            {
                "slots": [{"point": point_str(q), "order": k} for q, k in key],
                "coeff": rat_str(terms[key]),
            }
        )
    return out


def correlator_to_obj(corr: Correlator) -> dict:
    return {"g": corr.g, "n": corr.n, "terms": _terms_list(corr.terms)}


def free_energy_to_obj(fe: FreeEnergy) -> dict:
    return {"g": fe.g, "n": fe.n, "terms": _terms_list(fe.terms)}


def _sorted_gn(entries: dict) -> list:
    return sorted(entries, key=lambda gn: (2 * gn[0] - 2 + gn[1], gn))


def correlators_document(table: CorrelatorTable, meta: dict) -> dict:
    return {
        "schema": "spectral-rec/correlators/1",
        "meta": meta,
        "correlators": [correlator_to_obj(table.entries[gn]) for gn in _sorted_gn(table.entries)],
    }


def free_energies_document(ftable: FreeEnergyTable, meta: dict) -> dict:
    return {
        "schema": "spectral-rec/free-energies/1",
        "meta": meta,
        "free_energies": [free_energy_to_obj(ftable.entries[gn]) for gn in _sorted_gn(ftable.entries)],
    }


def wkb_document(expansion: WKBExpansion, report: QuantumCurveReport, meta: dict) -> dict:
    curve = expansion.curve
    terms = []
    for m in sorted(expansion.terms):
        sm = expansion.terms[m]
        poles = []
        for p in curve.active_points():
            order = -sm.order_at(p)
            if order > 0:
                poles.append({"point": point_str(p), "order": order})
        terms.append(
            {
                "m": m,
                "poles": poles,
                "rational": format_rational_function(sm),
            }
        )
    return {
        "schema": "spectral-rec/wkb/1",
        "meta": meta,
        "potential": format_rational_function(report.potential, "x"),
        "ds0": format_rational_function(expansion.ds0.fn),
        "ds1": format_rational_function(expansion.ds1.fn),
        "terms": terms,
        "verified_through": report.verified_through,
    }


def dumps_canonical(obj: dict) -> bytes:
    return (json.dumps(obj, separators=(",", ":"), ensure_ascii=True) + "\n").encode()


def _terms_from_list(items: list) -> dict:
    terms = {}
    for item in items:
        key = tuple((parse_point(s["point"]), int(s["order"])) for s in item["slots"])
        terms[key] = rat(item["coeff"])
    return terms


def load_correlators(doc: dict, curve: SpectralCurve) -> CorrelatorTable:
    if doc.get("schema") != "spectral-rec/correlators/1":
        raise MalformedInputError("not a correlator document")
    table = CorrelatorTable(curve)
    for obj in doc["correlators"]:
        table.store(Correlator(int(obj["g"]), int(obj["n"]), _terms_from_list(obj["terms"])))
    return table


def load_free_energies(doc: dict, curve: SpectralCurve) -> FreeEnergyTable:
    if doc.get("schema") != "spectral-rec/free-energies/1":
        raise MalformedInputError("not a free-energy document")
    ftable = FreeEnergyTable(curve)
    for obj in doc["free_energies"]:
        ftable.store(FreeEnergy(int(obj["g"]), int(obj["n"]), _terms_from_list(obj["terms"])))
    return ftable
