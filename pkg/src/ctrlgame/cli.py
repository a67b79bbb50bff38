"""Command-line front end: validate, inspect cases, print matrices, solve.

Exit codes: 0 on success, 1 on domain errors (no feasible combination,
blown expansion or case limits), 2 on usage and parse errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

from .algebra import DEFAULT_EXPANSION_LIMIT, filter_requirements, normalize
from .catalogue import (
    DEFAULT_CASE_LIMIT,
    ControlCatalogue,
    enumerate_cases,
    family_of,
    parse_catalogue,
)
from .errors import (
    CaseLimitExceeded,
    CtrlGameError,
    ExpansionLimitExceeded,
    NoFeasibleCombination,
    ParseError,
)
from .report import approx_str, build_report, render
from .solver import InfeasibleCase, parse_profile, solve
from .valuation import Budget, game_matrix

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _read_source(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _sniff_format(path: str, data: bytes) -> str:
    if path.endswith(".json"):
        return "json"
    if path.endswith(".csv"):
        return "csv"
    head = data.lstrip()[:1]
    return "json" if head in (b"{", b"[") else "csv"


def _load_catalogue(args) -> ControlCatalogue:
    data = _read_source(args.spec)
    fmt = args.format or _sniff_format(args.spec, data)
    return parse_catalogue(data, fmt)


def _parse_budget(text: str) -> Budget:
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise ParseError(f"budget {text!r} is not a decimal") from None
    if value < 0:
        raise ParseError("budget must be non-negative")
    return Budget(value)


def _emit(args, payload: bytes) -> None:
    if getattr(args, "output", None):
        Path(args.output).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()


def _cmd_validate(args) -> int:
    cat = _load_catalogue(args)
    cases = enumerate_cases(cat, args.case_limit)
    cells = cat.uncertain_cells()
    print(f"spec OK: {len(cat.controls)} controls, {len(cat.assets)} asset(s)")
    print(f"mandatory: {len(cat.mandatory_ids)}, optional: {len(cat.optional_ids)}")
    print(f"uncertain cells: {len(cells)}, cases: {len(cases)}")
    print(f"digest: {cat.digest()}")
    return EXIT_OK


def _cmd_cases(args) -> int:
    cat = _load_catalogue(args)
    cases = enumerate_cases(cat, args.case_limit)
    print(f"{len(cases)} cases")
    for case in cases:
        if case.assignment:
            parts = ", ".join(
                f"{cid} @ {ref} = {rating.label}"
                for cid, ref, rating in case.assignment
            )
        else:
            parts = "(no uncertain cells)"
        print(f"case {case.index}: {parts}")
    return EXIT_OK


def _cmd_matrix(args) -> int:
    cat = _load_catalogue(args)
    cases = enumerate_cases(cat, args.case_limit)
    if not 1 <= args.case <= len(cases):
        raise ParseError(f"case must be between 1 and {len(cases)}")
    case = cases[args.case - 1]
    if args.budget is not None:
        budget = _parse_budget(args.budget)
    else:
        budget = Budget(sum((c.cost for c in cat.controls), Decimal(0)))
    family = filter_requirements(
        normalize(family_of(cat), limit=args.expansion_limit), cat.rules
    )
    rows = game_matrix(family, case, cat, budget)
    refs = cat.objective_refs
    print("combination;" + ";".join(str(r) for r in refs))
    for row in rows:
        ids = ", ".join(sorted(row.combo)) if row.combo else "(empty)"
        scores = ";".join(approx_str(row.payoffs[r]) for r in refs)
        print(f"{ids};{scores}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    cat = _load_catalogue(args)
    budget = _parse_budget(args.budget)
    profile = parse_profile(_read_source(args.profile))
    try:
        outcome = solve(
            cat,
            budget,
            profile,
            case_limit=args.case_limit,
            threads=args.threads,
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    doc = build_report(outcome, cat, budget, profile)
    payload = render(doc, args.output_format)
    _emit(args, payload)
    if all(isinstance(r, InfeasibleCase) for r in outcome.results):
        return EXIT_DOMAIN
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctrlgame",
        description="Select budget-feasible security control combinations "
        "against an attacker profile.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--spec", required=True, help="catalogue file, '-' for stdin")
        p.add_argument(
            "--format",
            choices=("csv", "json"),
            help="catalogue format (default: by extension or content)",
        )
        p.add_argument(
            "--case-limit",
            type=int,
            default=DEFAULT_CASE_LIMIT,
            help="maximum number of uncertainty cases",
        )

    p_validate = sub.add_parser("validate", help="check a catalogue file")
    add_common(p_validate)
    p_validate.set_defaults(func=_cmd_validate)

    p_cases = sub.add_parser("cases", help="list the uncertainty cases")
    add_common(p_cases)
    p_cases.set_defaults(func=_cmd_cases)

    p_matrix = sub.add_parser("matrix", help="print the game matrix")
    add_common(p_matrix)
    p_matrix.add_argument("--case", type=int, default=1, help="1-based case index")
    p_matrix.add_argument("--budget", help="drop combinations over this budget")
    p_matrix.add_argument(
        "--expansion-limit",
        type=int,
        default=DEFAULT_EXPANSION_LIMIT,
        help="refuse families expanding beyond this many combinations",
    )
    p_matrix.set_defaults(func=_cmd_matrix)

    p_solve = sub.add_parser("solve", help="play the game and print the report")
    add_common(p_solve)
    p_solve.add_argument("--budget", required=True, help="spending cap")
    p_solve.add_argument("--profile", required=True, help="attacker profile JSON file")
    p_solve.add_argument(
        "--output-format", choices=("text", "json"), default="text"
    )
    p_solve.add_argument("--output", help="write the report here instead of stdout")
    p_solve.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("CTRLGAME_THREADS", "1")),
        help="solve cases concurrently (default CTRLGAME_THREADS or 1)",
    )
    p_solve.set_defaults(func=_cmd_solve)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (NoFeasibleCombination, ExpansionLimitExceeded, CaseLimitExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (CtrlGameError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
