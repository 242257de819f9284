"""Command-line driver.

Exit codes: 0 converged / suites pass, 1 usage or input error, 2 no
convergence within the iteration cap or a failing suite.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import engine, grounding
from .parikh.grammar import grammar_from_system
from .program import ProgramError, load_facts, load_program
from .semiring import parse_semiring, stability_index
from .verify import SUITES, run_suites

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2

class InputError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _max_iters(text: str):
    if text == "auto":
        return "auto"
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a natural number or 'auto'") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _load_system(args) -> grounding.GroundedSystem:
    if not args.program or not args.facts:
        raise InputError("--program and --facts are required")
    for path in (args.program, args.facts):
        if not Path(path).is_file():
            raise InputError(f"no such file: {path}")
    sr = parse_semiring(args.semiring)
    program = load_program(args.program)
    facts = load_facts(args.facts, sr)
    return grounding.prune_inactive(grounding.ground(program, facts))


def cmd_run(args) -> int:
    system = _load_system(args)
    report = engine.evaluate_to_fixpoint(system, args.max_iters, p=args.p)
    if args.report == "json":
        print(_dump(report.to_json()))
    else:
        sr = system.semiring
        b = report.bound
        if report.converged:
            print(f"converged: fixpoint_index={report.fixpoint_index} steps={report.steps_executed}")
        else:
            print(f"NonConvergent: no fixpoint within {report.max_iters} steps")
        print(f"bound: p={b.p} ({b.stability_reading}) n={b.n} sigma={b.sigma} "
              f"lambda={b.lam} theorem_bound={b.theorem_bound}")
        for atom, value in zip(system.atoms, report.final_state):
            print(f"{grounding.format_atom(atom)}\t{sr.format_value(value)}")
    if report.bound.exceeds_literal_bound and report.bound.p:
        print("warning: fixpoint index exceeds the literal bound for the measured p", file=sys.stderr)
    return EXIT_OK if report.converged else EXIT_FAIL


def cmd_ground(args) -> int:
    system = _load_system(args)
    text, stats = grounding.write_ground_output(system)
    if args.report == "json":
        print(stats)
    else:
        print(text, end="")
    return EXIT_OK


def cmd_grammar(args) -> int:
    g = grammar_from_system(_load_system(args))
    if args.report == "json":
        print(_dump({
            "nonterminals": list(g.nonterminals),
            "labels": list(g.labels),
            "terminals": {t: g.semiring.to_json(v) for t, v in zip(g.terminals, g.terminal_values)},
            "productions": len(g.productions),
            "text": g.to_text(),
        }))
    else:
        print(g.to_text(), end="")
    return EXIT_OK


def cmd_bound(args) -> int:
    p, n, sigma, lam = args.p, args.n, args.sigma, args.lam
    if min(p, n, sigma, lam) < 0:
        raise InputError("bound arguments must be naturals")
    triple = (engine.theorem_bound(p, n, sigma, lam), engine.h_bound(sigma, n, lam), engine.c_bound(n))
    if p == 0:
        print("warning: p = 0 makes the literal bound 0, although 0-stable programs "
              f"still need up to n steps; the auto guard uses {engine.iteration_guard(p, n, sigma, lam)}",
              file=sys.stderr)
    if args.report == "json":
        print(_dump(dict(zip(("theorem_bound", "h", "c"), triple))))
    else:
        print(f"({triple[0]}, {triple[1]}, {triple[2]})")
    return EXIT_OK


def cmd_stability(args) -> int:
    sr = parse_semiring(args.semiring)
    rows = []
    if args.program or args.facts:
        system = _load_system(args)
        p = engine.effective_stability(system, cap=args.cap)
        rows.append({"element": "effective", "index": p})
    else:
        if args.values:
            elements = [sr.parse_value(v) for v in args.values]
        else:
            elements = sr.carrier()
            if elements is None:
                raise InputError(f"{sr.selector} has an infinite carrier; list values to check")
        rows = [{"element": sr.format_value(el), "index": stability_index(el, args.cap)} for el in elements]
    if args.report == "json":
        print(_dump({"semiring": sr.selector, "cap": args.cap, "indices": rows}))
    else:
        for r in rows:
            idx = "not-stable-within-cap" if r["index"] is None else r["index"]
            print(f"{r['element']}\t{idx}")
    return EXIT_OK


def cmd_verify(args) -> int:
    extra = ()
    if args.program or args.facts:
        extra = (_load_system(args),)
    report = run_suites(
        args.seed,
        args.budget,
        suites=tuple(args.suite) if args.suite else SUITES,
        fault=args.inject_fault,
        extra_systems=extra,
    )
    if args.report == "text":
        for name, res in report["suites"].items():
            print(f"{name}\t{res['status']}\t{res.get('cases', '-')}")
    else:
        print(_dump(report))
    return EXIT_OK if report["ok"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="datalogo", description="Naive Datalog° evaluation over semirings.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    sub = parser.add_subparsers(dest="command", required=True)

    def inputs(sp, required_semiring=True):
        sp.add_argument("--program", help=".dlo rule file")
        sp.add_argument("--facts", help="TSV fact file")
        sp.add_argument("--semiring", default="boolean" if not required_semiring else None,
                        required=required_semiring,
                        help="boolean | tropical | bounded-nat:B=<n> | tropk:k=<n> | maxplus")

    def report(sp, default="text"):
        sp.add_argument("--report", choices=("text", "json"), default=default)

    sp = sub.add_parser("run", help="ground, prune and iterate to a fixpoint")
    inputs(sp)
    sp.add_argument("--max-iters", type=_max_iters, default="auto")
    sp.add_argument("--p", type=int, default=None, help="stability index to use instead of measuring it")
    report(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("ground", help="print the pruned polynomial system")
    inputs(sp)
    report(sp)
    sp.set_defaults(func=cmd_ground)

    sp = sub.add_parser("grammar", help="print the grammar view of the pruned system")
    inputs(sp)
    report(sp)
    sp.set_defaults(func=cmd_grammar)

    sp = sub.add_parser("bound", help="print (theorem_bound, h, c)")
    for name in ("p", "n", "sigma", "lam"):
        sp.add_argument(name, type=int, metavar=name.upper())
    report(sp)
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("stability", help="stability indices of values, a carrier or a program")
    inputs(sp)
    sp.add_argument("values", nargs="*", help="values to check (default: whole finite carrier)")
    sp.add_argument("--cap", type=int, default=256)
    report(sp)
    sp.set_defaults(func=cmd_stability)

    for name in ("verify", "parikh-verify"):
        sp = sub.add_parser(name, help="run the seeded oracle suites")
        inputs(sp, required_semiring=False)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--budget", type=int, default=10_000_000)
        sp.add_argument("--suite", action="append", choices=SUITES)
        sp.add_argument("--inject-fault", action="store_true", help="use a mutated ⊕ in the trees suite")
        report(sp, default="json")
        sp.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, ProgramError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
