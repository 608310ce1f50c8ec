"""``frat`` command line: elaboration, conversion and LRAT checking.

Exit status is 0 on success (or a verified proof), 1 when a proof fails to
elaborate or check, and 2 for usage and I/O errors. Diagnostics go to
stderr only on failure; ``--report`` prints ``key: value`` lines to stdout.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .clauses import FormatError, parse_dimacs
from .convert import ConversionError, dpr_to_frat, from_pr, strip_frat, transcode
from .elaborate import ElaborationError, elaborate
from .lrat import check_lrat_files

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt(p):
    p.add_argument("-f", "--format", choices=("auto", "text", "binary"), default="auto",
                   help="input encoding (default: detect)")


def _report(p):
    p.add_argument("--report", action="store_true", help="print statistics as key: value lines")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="frat", description="FRAT proof elaboration toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="echo comment steps of the input proof")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("elab", help="elaborate FRAT into LRAT/LPR")
    p.add_argument("frat")
    p.add_argument("dimacs")
    p.add_argument("out")
    p.add_argument("-m", "--memory", action="store_true",
                   help="keep the intermediate proof in memory instead of a temporary file")
    _fmt(p)
    _report(p)

    p = sub.add_parser("strip-frat", help="remove all hints from a FRAT proof")
    p.add_argument("input")
    p.add_argument("out")
    p.add_argument("--to", choices=("text", "binary"), help="output encoding (default: same as input)")
    _fmt(p)
    _report(p)

    for name, what in (("from-pr", "convert DPR to PR-free FRAT"),
                       ("dpr-to-frat", "convert DRAT/DPR to FRAT")):
        p = sub.add_parser(name, help=what)
        p.add_argument("dpr")
        p.add_argument("dimacs")
        p.add_argument("out")
        p.add_argument("--to", choices=("text", "binary"), default="text",
                       help="output encoding (default: text)")
        _fmt(p)
        _report(p)

    p = sub.add_parser("lrat-check", help="check an LRAT/LPR proof")
    p.add_argument("dimacs")
    p.add_argument("proof")

    p = sub.add_parser("transcode", help="re-encode a FRAT proof")
    p.add_argument("input")
    p.add_argument("out")
    p.add_argument("--to", choices=("text", "binary"), required=True)
    _fmt(p)
    return parser


def _distinct(*paths) -> None:
    seen = set()
    for p in paths:
        key = os.path.abspath(p)
        if key in seen:
            raise _UsageError(f"input and output paths must differ: {p}")
        seen.add(key)


def _print_lines(lines) -> None:
    for line in lines:
        print(line)


def _run(args) -> int:
    cmd = args.command
    if cmd == "elab":
        _distinct(args.frat, args.dimacs, args.out)
        rep = elaborate(args.frat, args.dimacs, args.out,
                        temp_mode="memory" if args.memory else "disk",
                        mode=args.format, echo_comments=args.verbose)
        if args.report:
            _print_lines(rep.lines())
        return EXIT_OK
    if cmd == "strip-frat":
        _distinct(args.input, args.out)
        summary = strip_frat(args.input, args.out, mode=args.format, target=args.to)
        if args.report:
            _print_lines(summary.lines())
        return EXIT_OK
    if cmd in ("from-pr", "dpr-to-frat"):
        _distinct(args.dpr, args.dimacs, args.out)
        formula = parse_dimacs(args.dimacs)
        convert = from_pr if cmd == "from-pr" else dpr_to_frat
        summary = convert(formula, args.dpr, args.out, mode=args.format, binary=args.to == "binary")
        if args.report:
            _print_lines(summary.lines())
        return EXIT_OK
    if cmd == "lrat-check":
        verdict = check_lrat_files(args.dimacs, args.proof)
        print(verdict)
        if verdict:
            return EXIT_OK
        if verdict.detail:
            print(f"frat: {verdict.detail}", file=sys.stderr)
        return EXIT_FAIL
    if cmd == "transcode":
        _distinct(args.input, args.out)
        transcode(args.input, args.out, args.to, mode=args.format)
        return EXIT_OK
    raise _UsageError("no subcommand given")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("no subcommand given")
    except _UsageError as exc:
        print(f"{parser.format_usage().rstrip()}\nfrat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    # Log records (header warnings, echoed comments) belong to normal output.
    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root = logging.getLogger("fratkit")
    root.addHandler(handler)
    root.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        return _run(args)
    except _UsageError as exc:
        print(f"frat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ElaborationError, ConversionError, FormatError) as exc:
        print(f"frat: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"frat: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        root.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
