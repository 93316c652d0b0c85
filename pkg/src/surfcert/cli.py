"""Command line entry point: ``surfcert verify``."""

from __future__ import annotations

import argparse
import sys

from .config import BUILTINS, ConfigError, ConfigSyntaxError, builtin_config, parse_config
from .pipeline import run_pipeline
from .report import emit_report

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surfcert",
        description="Exact certification of a smooth surface fibred in conics over an elliptic curve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    verify = sub.add_parser("verify", help="run the certification pipeline")
    source = verify.add_mutually_exclusive_group(required=True)
    source.add_argument("--builtin", choices=sorted(BUILTINS), help="use a built-in configuration")
    source.add_argument("--config", metavar="PATH", help="read a key = value configuration file")
    verify.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    verify.add_argument("--format", choices=("json", "text"), default="text")
    verify.add_argument("--prime-bound", type=int, metavar="B", help="bound for the local point sweeps")
    verify.add_argument("--seed", type=int, help="seed for the random fibre parameters")
    verify.add_argument("--timings", action="store_true", help="include per-check runtimes (output is then not reproducible)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.builtin:
            config = builtin_config(args.builtin)
        else:
            with open(args.config, encoding="utf-8") as fh:
                config = parse_config(fh.read())
    except (ConfigError, ConfigSyntaxError) as exc:
        print(f"surfcert: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"surfcert: cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE

    changes = {}
    if args.prime_bound is not None:
        if args.prime_bound < 3:
            print("surfcert: --prime-bound must be at least 3", file=sys.stderr)
            return EXIT_USAGE
        changes["prime_bound"] = args.prime_bound
    if args.seed is not None:
        changes["seed"] = args.seed
    if changes:
        config = config.replace(**changes)

    report = run_pipeline(config)
    text = emit_report(report, args.format, include_runtime=args.timings)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(report.summary_line())
    else:
        sys.stdout.write(text)
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
