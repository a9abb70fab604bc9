"""End-to-end orchestration: config, compute pipeline, verification suites.

One configuration file describes one curve; a run builds the curve, fills
the correlator table to level ``2 g_max - 2 + n_max``, integrates the
potentials, assembles the WKB expansion to ``wkb_order`` and certifies the
quantized operator.  Verification suites re-run the declared invariants and
cross paths on demand.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ._rat import Q, QONE, rat_str
from .curve import EXACT, SERIES, SpectralCurve, build_curve
from .errors import (
    InvariantViolationError,
    MalformedInputError,
    SpectralRecError,
    VerificationFailure,
)
from .expressions import parse_expression
from .free_energy import FreeEnergyTable, verify_free_energies
from .recursion import CorrelatorTable, sort_indices, verify_correlators
from .serialize import (
    correlators_document,
    dumps_canonical,
    free_energies_document,
    load_correlators,
    load_free_energies,
    wkb_document,
)
from .wkb import (
    WKBExpansion,
    build_wkb_expansion,
    ode_series_oracle,
    schrodinger_potential,
    verify_schrodinger,
    xchart_series,
    d_by_dx,
)

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

__all__ = ["CurveConfig", "ComputeResult", "load_config", "run_compute", "write_outputs", "run_verify"]

ORACLE_DEPTH = 12


@dataclass(frozen=True)
class CurveConfig:
    name: str
    x_expr: str
    y_expr: str
    mode: str = EXACT
    g_max: int = 2
    n_max: int = 2
    wkb_order: int = 4
    series_order: Optional[int] = None
    seed: int = 1
    h_model: bool = False

    def level_max(self) -> int:
        return 2 * self.g_max - 2 + self.n_max

    def effective_series_order(self) -> int:
        if self.series_order is not None:
            return self.series_order
        return 4 * self.g_max + 2 * self.n_max + 8


def load_config(path) -> CurveConfig:
    """Read a TOML config with [curve] and [compute] sections."""
    raw = Path(path).read_bytes()
    try:
        doc = tomllib.loads(raw.decode())
    except Exception as exc:
        raise MalformedInputError(f"config does not parse: {exc}") from exc
    curve = doc.get("curve", {})
    compute = doc.get("compute", {})
    try:
        cfg = CurveConfig(
            name=str(curve.get("name", Path(path).stem)),
            x_expr=str(curve["x"]),
            y_expr=str(curve["y"]),
            mode=str(curve.get("mode", EXACT)),
            g_max=int(compute.get("g_max", 2)),
            n_max=int(compute.get("n_max", 2)),
            wkb_order=int(compute.get("wkb_order", 4)),
            series_order=(
                int(curve["series_order"]) if "series_order" in curve else None
            ),
            seed=int(compute.get("seed", 1)),
        )
    except KeyError as exc:
        raise MalformedInputError(f"config is missing the {exc} field") from exc
    _validate(cfg)
    return cfg


def _validate(cfg: CurveConfig):
    if cfg.mode not in (EXACT, SERIES):
        raise MalformedInputError(f"mode must be 'exact' or 'series', got {cfg.mode!r}")
    if cfg.g_max < 0 or cfg.n_max < 1 or cfg.wkb_order < 2:
        raise MalformedInputError("need g_max >= 0, n_max >= 1, wkb_order >= 2")


def config_hash(cfg: CurveConfig) -> str:
    text = "|".join(
        [
            cfg.name,
            cfg.x_expr,
            cfg.y_expr,
            cfg.mode,
            str(cfg.g_max),
            str(cfg.n_max),
            str(cfg.wkb_order),
            str(cfg.effective_series_order()),
            str(cfg.seed),
            str(cfg.h_model),
        ]
    )
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def build_from_config(cfg: CurveConfig) -> SpectralCurve:
    x = parse_expression(cfg.x_expr)
    y = parse_expression(cfg.y_expr)
    if cfg.h_model:
        y = y * Q(1, 2)
    return build_curve(x, y, cfg.mode, cfg.effective_series_order(), cfg.name)


@dataclass
class ComputeResult:
    config: CurveConfig
    curve: SpectralCurve
    correlators: CorrelatorTable
    free_energies: FreeEnergyTable
    wkb: Optional[WKBExpansion] = None
    report: object = None

    def meta(self) -> dict:
        cfg = self.config
        return {
            "name": cfg.name,
            "x": cfg.x_expr,
            "y": cfg.y_expr,
            "mode": cfg.mode,
            "g_max": cfg.g_max,
            "n_max": cfg.n_max,
            "wkb_order": cfg.wkb_order,
            "series_order": cfg.effective_series_order(),
            "seed": cfg.seed,
            "h_model": cfg.h_model,
            "config_hash": config_hash(cfg),
        }


def run_compute(cfg: CurveConfig) -> ComputeResult:
    """Full pipeline: tables, potentials, WKB expansion, operator check."""
    curve = build_from_config(cfg)
    table = CorrelatorTable(curve)
    table.fill(cfg.level_max())
    ftable = FreeEnergyTable(curve)
    ftable.fill_from(table)
    result = ComputeResult(cfg, curve, table, ftable)
    if curve.mode == EXACT:
        expansion = build_wkb_expansion(curve, ftable, cfg.wkb_order)
        report = verify_schrodinger(expansion, cfg.wkb_order)
        result.wkb = expansion
        result.report = report
    return result


def write_outputs(result: ComputeResult, outdir) -> dict:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    meta = result.meta()
    paths = {}
    wpath = outdir / "w.json"
    wpath.write_bytes(dumps_canonical(correlators_document(result.correlators, meta)))
    paths["w"] = wpath
    fpath = outdir / "f.json"
    fpath.write_bytes(dumps_canonical(free_energies_document(result.free_energies, meta)))
    paths["f"] = fpath
    if result.wkb is not None:
        kpath = outdir / "wkb.json"
        kpath.write_bytes(dumps_canonical(wkb_document(result.wkb, result.report, meta)))
        paths["wkb"] = kpath
    return paths


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------


def _load_cached(cfg: CurveConfig, curve: SpectralCurve, outdir):
    """Reuse w.json / f.json when present and hash-valid; else recompute."""
    import json

    if outdir is None:
        return None
    outdir = Path(outdir)
    wpath, fpath = outdir / "w.json", outdir / "f.json"
    if not (wpath.exists() and fpath.exists()):
        return None
    try:
        wdoc = json.loads(wpath.read_bytes())
        fdoc = json.loads(fpath.read_bytes())
    except Exception:
        return None
    want = config_hash(cfg)
    if wdoc.get("meta", {}).get("config_hash") != want:
        return None
    if fdoc.get("meta", {}).get("config_hash") != want:
        return None
    table = load_correlators(wdoc, curve)
    ftable = load_free_energies(fdoc, curve)
    return table, ftable


def _check_cached_pair(table: CorrelatorTable, ftable: FreeEnergyTable):
    """Loaded tables must satisfy the round trip, or one file is corrupt."""
    if set(table.entries) != set(ftable.entries):
        raise InvariantViolationError("cached tables cover different (g,n) sets")
    for (g, n), fe in ftable.entries.items():
        rebuilt: dict = {}
        for key, c in fe.terms.items():
            factor = QONE
            new_key = []
            for q, k in key:
                factor *= -k
                new_key.append((q, k + 1))
            rebuilt[sort_indices(tuple(new_key))] = c * factor
        if rebuilt != table.w(g, n).terms:
            raise InvariantViolationError(
                f"round trip violated at ({g},{n}): cached tables are inconsistent"
            )


def run_verify(cfg: CurveConfig, suite: str, outdir=None, log=print) -> bool:
    """Run one of the named suites; returns overall pass/fail.

    ``correlators``: structural invariants of the stored tensors.
    ``free-energies``: round trip, normalization, diagonal orders, cross path.
    ``wkb``: term shape, two-path agreement, operator residuals, the series
    oracle at a rational anchor point.  ``all`` runs everything.
    """
    if suite not in ("correlators", "free-energies", "wkb", "all"):
        raise MalformedInputError(f"unknown suite {suite!r}")
    curve = build_from_config(cfg)
    cached = _load_cached(cfg, curve, outdir) if suite == "wkb" else None
    if cached is not None:
        table, ftable = cached
        log(f"[verify] reusing cached tables ({config_hash(cfg)})")
        try:
            _check_cached_pair(table, ftable)
        except SpectralRecError as exc:
            log(f"[wkb] FAIL {exc}")
            return False
    else:
        table = CorrelatorTable(curve)
        table.fill(cfg.level_max())
        ftable = FreeEnergyTable(curve)
        ftable.fill_from(table)

    ok = True
    if suite in ("correlators", "all"):
        report = verify_correlators(table, raise_on_failure=False)
        for check in report.checks:
            status = "pass" if check.ok else "FAIL"
            detail = f" [{check.detail}]" if check.detail else ""
            log(f"[correlators] {status} ({check.g},{check.n}) {check.name}{detail}")
        ok = ok and report.ok

    if suite in ("free-energies", "all"):
        try:
            done = verify_free_energies(ftable, table, samples=20, seed=cfg.seed)
            for g, n, name in done:
                log(f"[free-energies] pass ({g},{n}) {name}")
        except SpectralRecError as exc:
            log(f"[free-energies] FAIL {exc}")
            ok = False

    if suite in ("wkb", "all") and curve.mode == EXACT:
        try:
            expansion = build_wkb_expansion(curve, ftable, cfg.wkb_order)
            log(f"[wkb] pass two-path terms through order {cfg.wkb_order}")
            report = verify_schrodinger(expansion, cfg.wkb_order)
            log(f"[wkb] pass operator residuals through order {report.verified_through}")
            anchor = _oracle_anchor(curve)
            if anchor is not None:
                x0, y0, z0 = anchor
                pot = schrodinger_potential(curve)
                oracle = ode_series_oracle(pot, x0, y0, ORACLE_DEPTH, min(cfg.wkb_order, 4))
                for m in range(2, min(cfg.wkb_order, 4) + 1):
                    eng = xchart_series(
                        curve, d_by_dx(curve, expansion.term(m)), x0, z0, ORACLE_DEPTH
                    )
                    if not eng.equal_window(oracle[m].truncate(ORACLE_DEPTH)):
                        raise VerificationFailure(
                            f"series oracle mismatch at order {m}"
                        )
                log(
                    f"[wkb] pass series oracle at x0={rat_str(x0)} "
                    f"depth {ORACLE_DEPTH} orders 2..{min(cfg.wkb_order, 4)}"
                )
        except SpectralRecError as exc:
            log(f"[wkb] FAIL {exc}")
            ok = False
    elif suite in ("wkb", "all") and curve.mode != EXACT:
        log("[wkb] skip: series-mode curve has no exact-mode quantization")

    return ok


def _oracle_anchor(curve: SpectralCurve):
    """A rational (x0, y0, z0) anchor with y0 nonzero, off the caustics."""
    h = curve.ydx.fn
    for num in range(1, 400):
        for den in (1, 2, 3, 4, 8):
            for sign in (1, -1):
                z0 = Q(sign * num, den)
                try:
                    if h.den.evaluate(z0) == 0 or h.evaluate(z0) == 0:
                        continue
                    if curve.x.den.evaluate(z0) == 0 or curve.y.den.evaluate(z0) == 0:
                        continue
                    x0 = curve.x.evaluate(z0)
                    y0 = curve.y.evaluate(z0)
                    if y0 == 0:
                        continue
                    if curve.x.derivative().evaluate(z0) == 0:
                        continue
                    return x0, y0, z0
                except SpectralRecError:
                    continue
    return None
