"""Command-line interface: ``nonterm disprove|verify|reduce|corpus``.

Exit codes: 0 disproved / verified, 1 exhausted (UNSAT up to the bound) or
verification failed, 2 timeout, 64 usage, 65 bad input, 66 missing file,
69 no solver, 70 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import re
import sys

from . import __version__
from .automata import parse_automaton, serialize_automaton, verify_tda, verify_tdas
from .combinators import DEFAULT_CORPUS, RULES, get_rule
from .errors import InternalError, InvalidInput, InvalidRule, ParseError, SizeLimit, SpawnError
from .report import format_table, render_figures, to_json, write_csv
from .search import SearchOptions, disprove, run_corpus
from .terms import innermost_successors, is_normal_form, parse_term, rewrite_successors, show

EX_OK, EX_EXHAUSTED, EX_TIMEOUT = 0, 1, 2
EX_USAGE, EX_DATAERR, EX_NOINPUT, EX_UNAVAILABLE, EX_SOFTWARE = 64, 65, 66, 69, 70

STATUS_CODES = {"Disproved": EX_OK, "ExhaustedUnsat": EX_EXHAUSTED, "Timeout": EX_TIMEOUT}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _seconds(text):
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _methods(name):
    if name == "both":
        return ["tdas", "tda-baseline"]
    return ["tda-baseline" if name == "ez" else name]


def _search_flags(p, max_states):
    p.add_argument("--method", choices=["tdas", "tda-baseline", "ez", "both"], default="tdas",
                   help="encoding (ez is an alias of tda-baseline)")
    p.add_argument("--max-states", type=_positive_int, default=max_states)
    p.add_argument("--per-n-timeout", type=_seconds, default=None, metavar="SEC")
    p.add_argument("--timeout", type=_seconds, default=None, metavar="SEC",
                   help="total budget per combinator and method")
    p.add_argument("--solver", default=None, metavar="CMD",
                   help="external DIMACS solver (default $NONTERM_SAT_SOLVER or kissat)")
    p.add_argument("--builtin-solver", action="store_true", help="use the built-in CDCL solver")
    p.add_argument("--emit-cnf", default=None, metavar="DIR",
                   help="dump each instance as DIMACS plus a .map sidecar")
    p.add_argument("--steps", type=int, default=50, help="counterexample validation depth")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")


def _options(args, method):
    return SearchOptions(
        method=method, max_states=args.max_states, per_n_timeout=args.per_n_timeout,
        total_timeout=args.timeout, solver=args.solver, builtin=args.builtin_solver,
        validate_steps=args.steps, emit_cnf=args.emit_cnf,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nonterm", description="Disprove termination of sole combinatory calculi.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-N progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("disprove", help="search for a termination-disproving automaton")
    p.add_argument("rule", help=f"registered name ({', '.join(RULES)}) or a rule 'Z x y -> ...'")
    _search_flags(p, 8)

    p = sub.add_parser("verify", help="check an automaton file against a rule")
    p.add_argument("automaton", help="automaton file")
    p.add_argument("rule")
    p.add_argument("--tda", action="store_true", help="check the general (no sink) conditions")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("reduce", help="print a reduction sequence")
    p.add_argument("term")
    p.add_argument("rule", nargs="?", help="defaults to the registered combinator named in the term")
    p.add_argument("--steps", type=int, default=20)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--innermost", dest="innermost", action="store_true", default=True,
                   help="leftmost-innermost strategy (default)")
    g.add_argument("--full", dest="innermost", action="store_false",
                   help="leftmost-outermost strategy")

    p = sub.add_parser("corpus", help="run the built-in combinator corpus")
    _search_flags(p, 7)
    p.add_argument("--rules", default=None, help="comma-separated subset of the corpus")
    p.add_argument("--include-slow", action="store_true", help="also run Phi2")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--csv", default=None, metavar="PATH", help="write a CSV table ('-' for stdout)")
    p.add_argument("--figures", default=None, metavar="DIR", help="write summary plots (PNG)")
    return parser


def _print_outcome(o, out):
    print(f"{o.rule} [{o.method}]: {o.status}"
          + (f" with {o.found_states} states" if o.found_states else ""), file=out)
    for e in o.per_n:
        print(f"  N={e.n}: {e.result:<7} vars={e.variables} clauses={e.clauses} "
              f"encode={e.encode_s:.2f}s solve={e.solve_s:.2f}s", file=out)
    if o.automaton is not None:
        print("automaton:", file=out)
        for line in serialize_automaton(o.automaton).splitlines():
            print("  " + line, file=out)
        print(f"counterexample: {show(o.counterexample)}", file=out)
        if o.validation:
            print(f"validated: {o.validation['steps']} innermost levels, "
                  f"{o.validation['visited']} terms, no normal form", file=out)


def cmd_disprove(args, out=None) -> int:
    out = out or sys.stdout
    rule = get_rule(args.rule)
    outcomes = [disprove(rule, _options(args, m)) for m in _methods(args.method)]
    if args.json:
        data = [o.to_dict() for o in outcomes]
        print(json.dumps(data[0] if len(data) == 1 else data, indent=2), file=out)
    else:
        for o in outcomes:
            _print_outcome(o, out)
    return max(STATUS_CODES[o.status] for o in outcomes)


def cmd_verify(args, out=None) -> int:
    out = out or sys.stdout
    with open(args.automaton) as fh:
        A = parse_automaton(fh.read())
    rule = get_rule(args.rule)
    A = dataclasses.replace(A, leaf_name=rule.name)
    report = verify_tda(A, rule) if args.tda else verify_tdas(A, rule)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2), file=out)
    else:
        print(report.format(), file=out)
    return EX_OK if report.passed else EX_EXHAUSTED


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


def cmd_reduce(args, out=None) -> int:
    out = out or sys.stdout
    if args.rule:
        rule = get_rule(args.rule)
    else:
        names = set(_IDENT.findall(args.term))
        known = names & set(RULES)
        if len(names) != 1 or not known:
            raise InvalidInput("cannot infer the rule from the term; pass it explicitly")
        rule = get_rule(known.pop())
    t = parse_term(args.term, rule)
    succ = innermost_successors if args.innermost else rewrite_successors
    print(f"0: {show(t)}", file=out)
    done = 0
    while done < args.steps:
        nxt = succ(t, rule)
        if not nxt:
            break
        t = nxt[0]
        done += 1
        print(f"{done}: {show(t)}", file=out)
    if is_normal_form(t, rule):
        print(f"normal form after {done} steps", file=out)
    else:
        print(f"no normal form within {args.steps} steps", file=out)
    return EX_OK


def cmd_corpus(args, out=None) -> int:
    out = out or sys.stdout
    names = DEFAULT_CORPUS if not args.rules else [r.strip() for r in args.rules.split(",") if r.strip()]
    for n in names:
        if n not in RULES:
            raise InvalidInput(f"{n!r} is not in the built-in corpus")
    outcomes = []
    for m in _methods(args.method):
        outcomes += run_corpus(names, _options(args, m), jobs=args.jobs,
                               include_slow=args.include_slow)
    order = {n: i for i, n in enumerate(names)}
    outcomes.sort(key=lambda o: order[o.rule])
    if args.json:
        print(to_json(outcomes), file=out)
    else:
        print(format_table(outcomes), file=out)
    if args.csv == "-":
        write_csv(outcomes, out)
    elif args.csv:
        with open(args.csv, "w", newline="") as fh:
            write_csv(outcomes, fh)
    if args.figures:
        for p in render_figures(outcomes, args.figures):
            print(f"wrote {p}", file=sys.stderr)
    errors = [o for o in outcomes if o.status == "Error"]
    for o in errors:
        print(f"{o.rule} [{o.method}]: {o.detail}", file=sys.stderr)
    return EX_SOFTWARE if errors else EX_OK


COMMANDS = {"disprove": cmd_disprove, "verify": cmd_verify, "reduce": cmd_reduce, "corpus": cmd_corpus}


def main(argv=None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except FileNotFoundError as e:
        print(f"nonterm: {e.filename}: no such file", file=sys.stderr)
        return EX_NOINPUT
    except (ParseError, InvalidRule, InvalidInput, SizeLimit) as e:
        print(f"nonterm: {e}", file=sys.stderr)
        return EX_DATAERR
    except SpawnError as e:
        print(f"nonterm: {e}", file=sys.stderr)
        return EX_UNAVAILABLE
    except InternalError as e:
        print(f"nonterm: internal error: {e}", file=sys.stderr)
        return EX_SOFTWARE


if __name__ == "__main__":
    sys.exit(main())
