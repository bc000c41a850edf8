"""Command line entry point ``ek``.

Exit status is 0 only when every configured assertion passes; 1 when an
assertion fails; 2 for invalid configuration or input.
"""
from __future__ import annotations

import argparse
import logging
import sys

from ..fields import SnapshotFormatError
from .config import ConfigError, load_config
from .pipelines import besov_from_snapshot, run_scenario

log = logging.getLogger("eklab")

# subcommand -> pipeline name in the config
COMMANDS = {
    "simulate": "simulate",
    "madelung": "madelung",
    "energy-audit": "energy-audit",
    "commutator-scan": "commutator-scan",
    "besov": "besov-fit",
    "cross-validate": "cross-validate",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ek", description="Euler-Korteweg energy-balance laboratory")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "besov":
            p.add_argument("--config", help="scenario file (besov-fit pipeline)")
            p.add_argument("--field", help="snapshot file to analyse instead of a config")
            p.add_argument("--component", default="rho", help="rho, m0, m1, u0 or u1 (default rho)")
            p.add_argument("--p", type=float, default=3.0, help="integrability exponent (2 or 3)")
        else:
            p.add_argument("--config", required=True, help="scenario file")
        p.add_argument("--out", help="output directory (for --field: the table.csv path)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for eps scans")
    return parser


def _run_field(args) -> int:
    if args.p not in (2.0, 3.0):
        log.error("--p must be 2 or 3")
        return 2
    est, _, files = besov_from_snapshot(args.field, args.p, args.out or "table.csv", args.component)
    print(f"alpha_hat = {est.alpha:.4f}  r2 = {est.r2:.4f}  ({', '.join(map(str, files))})")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        if args.command == "besov" and args.field:
            return _run_field(args)
        if args.config is None:
            log.error("either --config or --field is required")
            return 2
        cfg = load_config(args.config)
        expected = COMMANDS[args.command]
        if cfg.pipeline != expected:
            log.error("config pipeline is %r but subcommand %r runs %r", cfg.pipeline, args.command, expected)
            return 2
        bundle = run_scenario(cfg, args.out, max(1, args.threads))
    except ConfigError as exc:
        log.error("%s", exc)
        return 2
    except (SnapshotFormatError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return 2
    for name, ok in bundle.assertions.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    if not bundle.assertions:
        print(f"no assertions ({bundle.summary.get('verdict', 'report only')})")
    return 0 if bundle.passed else 1


if __name__ == "__main__":
    sys.exit(main())
