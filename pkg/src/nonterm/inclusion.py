"""Language inclusion by subset construction, and the TDA to TDAS reduction."""

from __future__ import annotations

from typing import Optional

from .automata import (
    TreeAutomaton, _post, reachable_states, restrict, sink_rules, verify_tda,
)
from .errors import InvalidInput, SizeLimit
from .terms import App, CombinatorRule, Leaf, Term

__all__ = ["language_inclusion", "inclusion_counterexample", "tda_to_tdas"]

MAX_SUBSETS = 2 ** 12
MAX_STATES = 12


def inclusion_counterexample(A: TreeAutomaton, q: int, B: TreeAutomaton, p: int,
                             limit: int = MAX_SUBSETS) -> Optional[Term]:
    """A term in ``L(A,q) \\ L(B,p)``, or ``None`` if the inclusion holds.

    Explores the product of ``A`` with the on-the-fly determinisation of
    ``B``; a reachable pair ``(q, S)`` with ``p`` not in ``S`` separates.
    """
    leaf = Leaf(A.leaf_name)
    found = {}  # (state of A, subset of B) -> witness term
    by_state = {}
    subsets = set()

    def add(pair, term):
        if pair in found:
            return False
        subsets.add(pair[1])
        if len(subsets) > limit:
            raise SizeLimit(f"determinisation exceeded {limit} subset states")
        found[pair] = term
        by_state.setdefault(pair[0], []).append(pair[1])
        return True

    for a in A.leaf:
        add((a, B.leaf), leaf)
    rules = sorted(A.app)
    changed = True
    while changed:
        changed = False
        for a1, a2, a in rules:
            for s1 in list(by_state.get(a1, ())):
                for s2 in list(by_state.get(a2, ())):
                    pair = (a, _post(B.delta, s1, s2))
                    if pair not in found:
                        add(pair, App(found[(a1, s1)], found[(a2, s2)]))
                        changed = True
    bad = [found[(q, s)] for s in by_state.get(q, ()) if p not in s]
    if not bad:
        return None
    return min(bad, key=lambda t: t.size)


def language_inclusion(A: TreeAutomaton, q: int, B: TreeAutomaton, p: int,
                       limit: int = MAX_SUBSETS) -> bool:
    """Decide ``L(A,q) ⊆ L(B,p)`` exactly."""
    return inclusion_counterexample(A, q, B, p, limit) is None


def tda_to_tdas(A0: TreeAutomaton, rule: CombinatorRule) -> TreeAutomaton:
    """Turn a TDA into a TDAS with no more states.

    The lowest final state becomes the sink; every state whose language only
    holds terms with a subterm accepted there is merged into it.  States are
    renumbered so the sink comes last.
    """
    if A0.n > MAX_STATES:
        raise SizeLimit(f"tda_to_tdas is limited to {MAX_STATES} states, got {A0.n}")
    report = verify_tda(A0, rule, strict=True)
    if not report.passed:
        raise InvalidInput(f"input is not a TDA (failed: {', '.join(report.failed())})")

    reach = reachable_states(A0)
    if len(reach) < A0.n:
        A0 = restrict(A0, reach)
    qf = min(A0.final)
    # adding the sink rules at qf makes L(A', qf) = terms with a subterm in L(A0, qf)
    closed = TreeAutomaton(A0.n, {qf}, A0.leaf, A0.app | sink_rules(A0.n, qf), A0.leaf_name)
    merged = {q for q in A0.states if language_inclusion(A0, q, closed, qf)}
    keep = (set(A0.states) - merged) | {qf}
    inner = keep - {qf}
    leaf = {q for q in A0.leaf if q in keep}
    app = {(a, b, c) for a, b, c in A0.app if a in inner and b in inner and c in keep}
    app |= {(a, b, qf) for a in keep for b in keep if qf in (a, b)}

    order = sorted(inner) + [qf]
    idx = {q: i for i, q in enumerate(order, 1)}
    return TreeAutomaton(
        len(order), {idx[qf]}, {idx[q] for q in leaf},
        {(idx[a], idx[b], idx[c]) for a, b, c in app}, A0.leaf_name,
    )
