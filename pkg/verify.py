#!/usr/bin/env python3
"""
Entangled Phase-Space Verification

Runs the numerical verification catalog for the two-mode entangled-state
representation and its Weyl calculus, and writes a JSON report (optionally a CSV
summary and a Markdown overview).

Usage:
    python verify.py [options]

Options:
    --config=<path>        Config file with `key = value` lines
    --suite=<name>         Suite to run (fock, states, weyl, xform, ordering, all); repeatable
    --out=<path>           JSON report path (overrides `output`)
    --jobs=<n>             Worker threads (overrides `parallelism`)
    --cutoff=<n>           Per-mode Fock cutoff (overrides `cutoff`)
    --csv=<path>           Also write a CSV summary
    --markdown=<path>      Also write a Markdown summary
    --log-level=<level>    DEBUG, INFO, WARNING or ERROR

Exit status:
    0 when every check passes (printed-formula mismatch flags included),
    1 when any check fails, 2 on configuration errors.

Example:
    python verify.py --config=verify.conf --suite=xform --suite=ordering --out=report.json
"""

import argparse
import logging
import sys

from phase_errors import ConfigError
from suite_catalog import run_suite
from suite_config import SUITE_ORDER, load_config

logger = logging.getLogger("verify")

# Constants
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def parse_arguments(argv=None):
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(description="Entangled phase-space verification suite")
    parser.add_argument("--config", help="Config file with `key = value` lines")
    parser.add_argument(
        "--suite",
        action="append",
        choices=SUITE_ORDER + ("all",),
        help="Suite to run; may be given more than once",
    )
    parser.add_argument("--out", help="JSON report path")
    parser.add_argument("--jobs", type=int, help="Worker threads")
    parser.add_argument("--cutoff", type=int, help="Per-mode Fock cutoff")
    parser.add_argument("--csv", help="CSV summary path")
    parser.add_argument("--markdown", help="Markdown summary path")
    parser.add_argument("--log-level", default="INFO", choices=LOG_LEVELS, help="Logging level")
    return parser.parse_args(argv)


def build_config(args):
    """Config file values with command line overrides applied."""
    config = load_config(args.config)
    return config.with_overrides(
        suites=args.suite,
        output=args.out,
        parallelism=args.jobs,
        cutoff=args.cutoff,
        csv=args.csv,
        markdown=args.markdown,
    )


def main(argv=None):
    """Main function for the verification command."""
    args = parse_arguments(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        config = build_config(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG

    try:
        report = run_suite(config)
    except Exception as e:
        logger.error(f"Error: {str(e)}")
        return EXIT_FAILED

    flagged = report.flagged()
    if flagged:
        logger.warning(f"{len(flagged)} check(s) carry printed-formula mismatch flags:")
        for record in flagged:
            logger.warning(f"  {record.name}: {record.mismatches} coefficient mismatch(es)")
    for record in report.failures():
        logger.error(f"FAILED {record.name}: {record.message or record.measured}")

    print(f"Report written to {config.output}")
    return EXIT_FAILED if report.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
