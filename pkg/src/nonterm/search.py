"""Iterative-deepening search for a termination-disproving automaton."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .automata import (
    TreeAutomaton, VerificationReport, accepts, serialize_automaton,
    smallest_accepted_term, verify_tda, verify_tdas,
)
from .cnf import write_dimacs
from .combinators import SLOW, get_rule
from .encoding import (
    Eval, MinLd, Redex, decode_automaton, encode_tda_baseline, encode_tdas, eval_variable_count,
    oracle_mismatches,
)
from .errors import InternalError, InvalidInput, NontermError, ValidationFailure
from .solvers import Satisfiable, Unknown, solve
from .terms import CombinatorRule, Term, innermost_successors, is_normal_form, rewrite_successors, show

__all__ = [
    "SearchOptions", "SearchOutcome", "NLog", "disprove", "validate_counterexample", "run_corpus",
]

log = logging.getLogger(__name__)

METHODS = {"tdas": encode_tdas, "tda-baseline": encode_tda_baseline}


@dataclass
class SearchOptions:
    method: str = "tdas"
    max_states: int = 8
    per_n_timeout: Optional[float] = None
    total_timeout: Optional[float] = None
    solver: Union[str, Sequence[str], None] = None   # external command; None = default
    builtin: bool = False
    conflict_limit: Optional[int] = None            # builtin solver only
    validate_steps: int = 50
    validate_breadth: int = 100
    emit_cnf: Optional[str] = None                  # directory for DIMACS dumps
    check_oracles: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidInput(f"unknown method {self.method!r} (expected one of {', '.join(METHODS)})")
        if self.max_states < 1:
            raise InvalidInput("max_states must be positive")


@dataclass
class NLog:
    n: int
    result: str          # SAT, UNSAT, TIMEOUT or ERROR
    variables: int
    clauses: int
    encode_s: float
    solve_s: float
    eval_vars: int = 0
    detail: str = ""

    def to_dict(self):
        return {"n": self.n, "result": self.result, "vars": self.variables,
                "clauses": self.clauses, "encode_s": round(self.encode_s, 4),
                "solve_s": round(self.solve_s, 4)}


@dataclass
class SearchOutcome:
    rule: str
    method: str
    status: str                     # Disproved, ExhaustedUnsat, Timeout, Skipped, Error
    found_states: Optional[int] = None
    automaton: Optional[TreeAutomaton] = None
    verification: Optional[VerificationReport] = None
    counterexample: Optional[Term] = None
    validation: Optional[dict] = None
    per_n: list = field(default_factory=list)
    oracle_mismatches: int = 0
    oracle_checked: int = 0         # MinLd/Redex/Eval variables compared
    detail: str = ""

    @property
    def total_s(self) -> float:
        return sum(e.encode_s + e.solve_s for e in self.per_n)

    @property
    def final_log(self) -> Optional[NLog]:
        return self.per_n[-1] if self.per_n else None

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "method": self.method,
            "status": self.status,
            "found_states": self.found_states,
            "per_n": [e.to_dict() for e in self.per_n],
            "counterexample": show(self.counterexample) if self.counterexample is not None else None,
            "automaton": serialize_automaton(self.automaton) if self.automaton is not None else None,
            "verification": self.verification.to_dict() if self.verification else None,
            "total_s": round(self.total_s, 4),
            "detail": self.detail,
        }


def validate_counterexample(term: Term, automaton: TreeAutomaton, rule: CombinatorRule,
                            steps: int = 50, breadth: int = 100, innermost: bool = True) -> dict:
    """Bounded re-check that ``term`` has no reduction to a normal form.

    Explores the reduction tree level by level (at most ``breadth`` terms
    per level, smallest first) and requires every visited term to be
    accepted and not in normal form.
    """
    if not accepts(automaton, term):
        raise InvalidInput(f"{show(term)} is not accepted by the automaton")
    if is_normal_form(term, rule):
        raise ValidationFailure(f"{show(term)} is a normal form", term, 0)
    succ = innermost_successors if innermost else rewrite_successors
    level = [term]
    visited = 1
    largest = term.size
    for step in range(1, steps + 1):
        seen = set()
        nxt = []
        for t in level:
            for s in succ(t, rule):
                if s not in seen:
                    seen.add(s)
                    nxt.append(s)
        nxt.sort(key=lambda t: t.size)
        nxt = nxt[:breadth]
        for s in nxt:
            if is_normal_form(s, rule):
                raise ValidationFailure(f"step {step}: reached normal form {show(s)}", s, step)
            if not accepts(automaton, s):
                raise ValidationFailure(f"step {step}: {show(s)} left the language", s, step)
        visited += len(nxt)
        largest = max([largest] + [s.size for s in nxt])
        level = nxt
    return {"steps": steps, "visited": visited, "largest": largest}


def _emit(instance, directory, rule, method, n):
    os.makedirs(directory, exist_ok=True)
    stem = os.path.join(directory, f"{rule.name}-{method}-N{n}")
    write_dimacs(instance, stem + ".cnf")
    with open(stem + ".map", "w") as fh:
        for line in instance.var_map_lines():
            fh.write(line + "\n")


def disprove(rule: Union[CombinatorRule, str], options: Optional[SearchOptions] = None) -> SearchOutcome:
    """Try N = M+1, M+2, ... up to ``max_states``; stop at the first SAT.

    A solver timeout at some N is logged and the search moves on, so a
    later success is then no longer known to be minimal.
    """
    if isinstance(rule, str):
        rule = get_rule(rule)
    opts = options or SearchOptions()
    if opts.max_states < rule.arity + 1:
        raise InvalidInput(f"max_states must be at least {rule.arity + 1} for {rule.name}")
    encode = METHODS[opts.method]
    out = SearchOutcome(rule.name, opts.method, "ExhaustedUnsat")
    start = time.monotonic()
    timed_out = False
    for n in range(rule.arity + 1, opts.max_states + 1):
        limit = opts.per_n_timeout
        if opts.total_timeout is not None:
            left = opts.total_timeout - (time.monotonic() - start)
            if left <= 0:
                timed_out = True
                break
            limit = left if limit is None else min(limit, left)
        t0 = time.monotonic()
        inst = encode(rule, n)
        enc = time.monotonic() - t0
        if opts.emit_cnf:
            _emit(inst, opts.emit_cnf, rule, opts.method, n)
        t0 = time.monotonic()
        res = solve(inst, opts.solver, opts.builtin, limit, opts.conflict_limit)
        sol = time.monotonic() - t0
        entry = NLog(n, res.status, inst.num_vars, inst.num_clauses, enc, sol,
                     eval_variable_count(inst))
        out.per_n.append(entry)
        log.info("%s %s N=%d: %s (%d vars, %d clauses, %.2fs + %.2fs)", rule.name,
                 opts.method, n, res.status, inst.num_vars, inst.num_clauses, enc, sol)
        if isinstance(res, Unknown):
            entry.result = "TIMEOUT" if res.reason == "timeout" else "ERROR"
            entry.detail = res.detail
            timed_out = True
            continue
        if not isinstance(res, Satisfiable):
            continue
        A = decode_automaton(inst, res.model)
        report = verify_tdas(A, rule) if opts.method == "tdas" else verify_tda(A, rule)
        if not report.passed:
            raise InternalError(
                f"{rule.name} N={n}: decoded automaton fails {', '.join(report.failed())}\n"
                + serialize_automaton(A))
        if opts.check_oracles:
            bad = oracle_mismatches(inst, res.model, A, rule)
            out.oracle_mismatches = len(bad)
            out.oracle_checked = sum(1 for k in inst.index if isinstance(k, (MinLd, Redex, Eval)))
            if bad:
                raise InternalError(f"{rule.name} N={n}: {len(bad)} oracle mismatches, e.g. {bad[0]}")
        term = smallest_accepted_term(A)
        try:
            out.validation = validate_counterexample(
                term, A, rule, opts.validate_steps, opts.validate_breadth)
        except ValidationFailure as e:
            raise InternalError(f"{rule.name} N={n}: counterexample fails validation: {e}") from e
        out.status = "Disproved"
        out.found_states = n
        out.automaton = A
        out.verification = report
        out.counterexample = term
        return out
    if timed_out:
        out.status = "Timeout"
    return out


def _row(args):
    name, opts = args
    try:
        return disprove(name, opts)
    except NontermError as e:
        rule = name if isinstance(name, str) else name.name
        return SearchOutcome(rule, opts.method, "Error", detail=f"{type(e).__name__}: {e}")


def run_corpus(rules: Sequence[Union[str, CombinatorRule]], options: Optional[SearchOptions] = None,
               jobs: int = 1, include_slow: bool = False) -> list:
    """One outcome per rule, in input order; failures become ``Error`` rows."""
    opts = options or SearchOptions()
    rows = [None] * len(rules)
    work = []
    for i, r in enumerate(rules):
        name = r if isinstance(r, str) else r.name
        if name in SLOW and not include_slow:
            rows[i] = SearchOutcome(name, opts.method, "Skipped", detail="slow; enable explicitly")
        else:
            work.append((i, r))
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for (i, _), res in zip(work, pool.map(_row, [(r, opts) for _, r in work])):
                rows[i] = res
    else:
        for i, r in work:
            rows[i] = _row((r, opts))
    return rows
