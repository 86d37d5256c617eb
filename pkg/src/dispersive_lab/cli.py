"""Command-line entry point.

    dispersive-lab <subcommand> --config <path> [--out <dir>] [--seed <u64>]
    dispersive-lab report <results_dir>

Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 config error.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import OUT_ENV, SUBCOMMANDS, ConfigError, execute, format_table, load_config, report

EXIT = {"pass": 0, "fail": 1, "inconclusive": 2}
EXIT_CONFIG = 3


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dispersive-lab", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name, (_, anchor) in SUBCOMMANDS.items():
        sp = sub.add_parser(name, help=anchor)
        sp.add_argument("--config", required=True, help="TOML or JSON config")
        sp.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./results)")
        sp.add_argument("--seed", type=_u64, default=None, help="override the config seed")
    rp = sub.add_parser("report", help="summarize run records in a directory")
    rp.add_argument("results_dir")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.subcommand == "report":
        try:
            rows = report(args.results_dir)
        except FileNotFoundError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_CONFIG
        print(format_table(rows))
        return 0
    try:
        cfg = load_config(args.config)
        rec = execute(args.subcommand, cfg, args.out, args.seed)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"[{rec.status.upper()}] {rec.subcommand} {rec.id}: {rec.summary['text']}")
    return EXIT[rec.status]


if __name__ == "__main__":
    sys.exit(main())
