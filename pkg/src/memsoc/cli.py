"""Command line front end: ``memsoc describe | validate | audit | simulate | bist | run``.

Exit codes: 0 ok, 1 violations / mismatches / BIST failures under ``--strict``,
2 bad input (unreadable file, malformed description or workload).
"""

from __future__ import annotations

import argparse
import sys
from typing import Any, Dict, List, Optional

from .core.io_utils import dumps_json
from .core.logging_utils import get_logger
from .runner import run_pipeline, run_step

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_BAD_INPUT = 2

VERBS = {
    "describe": ("Describe", "json"),
    "validate": ("Validate", "text"),
    "audit": ("Audit", "text"),
    "simulate": ("Simulate", "json"),
    "bist": ("Bist", "text"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memsoc", description="Memristor SoC simulator and budget audit.")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p: argparse.ArgumentParser, desc_arg: bool = True) -> None:
        if desc_arg:
            p.add_argument("description", nargs="?", help="chip description JSON (default: reference chip)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", choices=("json", "text"), default=None)
        p.add_argument("--out", dest="report", default=None, help="also write the JSON report here")

    p = sub.add_parser("describe", help="print the reference chip description")
    common(p)
    p = sub.add_parser("validate", help="check floorplan and bond-wire rules")
    common(p)
    p.add_argument("--strict", action="store_true", help="exit 1 on any error-severity violation")
    p = sub.add_parser("audit", help="rail, pad and bandwidth audit")
    common(p)
    p.add_argument("--strict", action="store_true", help="exit 1 when any claim disagrees with the tables")
    p.add_argument("--pad-limit-ma", dest="pad_limit_ma", type=float, default=None)
    p.add_argument("--noc-clock-hz", dest="noc_clock_hz", type=float, default=None)
    p.add_argument("--table", default=None, help="write the text table here")
    p = sub.add_parser("simulate", help="run a workload")
    common(p)
    p.add_argument("workload", nargs="?", help="workload JSON (default: empty workload)")
    p.add_argument("--trace", default=None, help="NoC traffic trace CSV")
    p.add_argument("--monitor", default=None, help="monitor capture (.bin or .csv)")
    p.add_argument("--events", default=None, help="irq event log CSV")
    p = sub.add_parser("bist", help="MBIST on every SRAM plus the scan-chain check")
    common(p)
    p.add_argument("--strict", action="store_true", help="exit 1 when any test fails")
    p.add_argument("--inject", action="append", default=[], metavar="[TARGET:]ADDR:BIT:VALUE")
    p.add_argument("--scan-break", dest="scan_break", type=int, default=None)
    p.add_argument("--no-scan", dest="scan_enable", action="store_false")

    p = sub.add_parser("run", help="run a YAML pipeline")
    p.add_argument("config")
    return parser


def _params(args: argparse.Namespace) -> Dict[str, Any]:
    skip = {"verb", "verbose", "format", "seed", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip and v not in (None, [])}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    log = get_logger("memsoc.cli", verbose=args.verbose)

    if args.verb == "run":
        try:
            logs = run_pipeline(args.config)
        except (OSError, ValueError, KeyError) as exc:
            log.error("%s", exc)
            return EXIT_BAD_INPUT
        for row in logs:
            print(f"{row.step_name}: {row.status}")
            for msg in row.messages:
                print(f"  {msg}")
        if any(row.status == "bad_input" for row in logs):
            return EXIT_BAD_INPUT
        return EXIT_OK if all(row.status == "ok" for row in logs) else EXIT_FINDINGS

    step_name, default_format = VERBS[args.verb]
    result, _row = run_step(step_name, _params(args), seed=args.seed)
    if result.bad_input:
        for msg in result.messages:
            print(msg, file=sys.stderr)
        return EXIT_BAD_INPUT

    if (args.format or default_format) == "json":
        sys.stdout.write(dumps_json(result.payload))
    else:
        print("\n".join(result.messages))
    return EXIT_OK if result.ok else EXIT_FINDINGS


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
