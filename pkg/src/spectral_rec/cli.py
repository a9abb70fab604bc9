"""Command-line driver.

Three subcommands, one curve per config file::

    spectral-rec compute <config.toml> [--out DIR] [--h-model]
    spectral-rec verify  <config.toml> --suite {correlators,free-energies,wkb,all}
    spectral-rec wkb     <config.toml> --order M [--out DIR]

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 internal-consistency error.  ``SPECTRAL_REC_THREADS`` caps worker
parallelism; the engine is deterministic for every value (the current
implementation computes each level serially, so the cap is a no-op).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .engine import load_config, run_compute, run_verify, write_outputs
from .errors import (
    ConsistencyError,
    InputError,
    SpectralRecError,
    VerificationFailure,
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_BAD_INPUT = 2
EXIT_INCONSISTENT = 3


def _threads_cap() -> int:
    raw = os.environ.get("SPECTRAL_REC_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(f"SPECTRAL_REC_THREADS must be an integer, got {raw!r}")
    if cap < 1:
        raise InputError("SPECTRAL_REC_THREADS must be at least 1")
    return cap


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectral-rec",
        description="exact topological recursion and WKB quantization on rational spectral curves",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_compute = sub.add_parser("compute", help="fill tables, integrate, quantize, write JSON")
    p_compute.add_argument("config")
    p_compute.add_argument("--out", default="out")
    p_compute.add_argument(
        "--h-model",
        action="store_true",
        help="halve y to reproduce the unit-quadratic local normalization",
    )

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("config")
    p_verify.add_argument(
        "--suite",
        required=True,
        choices=["correlators", "free-energies", "wkb", "all"],
    )
    p_verify.add_argument("--out", default=None, help="directory with cached w.json/f.json")
    p_verify.add_argument("--h-model", action="store_true")

    p_wkb = sub.add_parser("wkb", help="compute the expansion to a given order")
    p_wkb.add_argument("config")
    p_wkb.add_argument("--order", type=int, required=True)
    p_wkb.add_argument("--out", default="out")
    p_wkb.add_argument("--h-model", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        _threads_cap()
        cfg = load_config(args.config)
        if getattr(args, "h_model", False):
            cfg = replace(cfg, h_model=True)
        if args.command == "compute":
            result = run_compute(cfg)
            paths = write_outputs(result, args.out)
            for kind in sorted(paths):
                print(f"wrote {paths[kind]}")
            return EXIT_OK
        if args.command == "verify":
            ok = run_verify(cfg, args.suite, outdir=args.out)
            print("verification:", "pass" if ok else "FAIL")
            return EXIT_OK if ok else EXIT_VERIFY_FAIL
        if args.command == "wkb":
            cfg = replace(cfg, wkb_order=args.order)
            result = run_compute(cfg)
            paths = write_outputs(result, args.out)
            for kind in sorted(paths):
                print(f"wrote {paths[kind]}")
            return EXIT_OK
        raise InputError(f"unknown command {args.command!r}")
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAIL
    except SpectralRecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
