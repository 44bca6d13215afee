"""Propositional encodings of "an N-state termination-disproving automaton exists".

States are numbered so that ``1 < 2 < ... < N`` is a reachability order and
``N`` is the (unique) final state.  Two encodings are provided:

* :func:`encode_tdas` searches for an automaton whose final state is a sink.
  Left-depth variables certify that the final language has no normal form,
  and the closure substitutions never map a variable to the final state.
* :func:`encode_tda_baseline` is the older scheme with no sink.  Normal
  forms are excluded through reachability in the product with the
  left-depth automaton, and substitutions range over every state.
"""

from __future__ import annotations

import itertools
from array import array
from dataclasses import dataclass

from .automata import (
    TreeAutomaton, minld, nf_intersection_empty, reachability_order, renumber, run_open,
)
from .cnf import CnfBuilder, CnfInstance, Model
from .errors import InvalidInput, ModelInconsistent
from .terms import App, CombinatorRule, Leaf, Var, show

__all__ = [
    "TransLeaf", "TransApp", "MinLd", "Redex", "Eval", "NfReach",
    "encode_tdas", "encode_tda_baseline", "decode_automaton", "cnf_stats",
    "eval_variable_count", "oracle_mismatches", "pin_automaton",
]


# Dataclass keys compare by class as well as fields: Redex(1) != TransLeaf(1).

@dataclass(frozen=True, slots=True)
class TransLeaf:
    q: int

    def describe(self):
        return f"Z->{self.q}"


@dataclass(frozen=True, slots=True)
class TransApp:
    q1: int
    q2: int
    q: int

    def describe(self):
        return f"A({self.q1},{self.q2})->{self.q}"


@dataclass(frozen=True, slots=True)
class MinLd:
    q: int
    m: int

    def describe(self):
        return f"minld({self.q})={self.m}"


@dataclass(frozen=True, slots=True)
class Redex:
    q: int

    def describe(self):
        return f"redex({self.q})"


@dataclass(frozen=True, slots=True)
class Eval:
    """``term·alpha =>* q``; ``alpha`` lists states for the term's variables
    in increasing variable order."""

    term: object
    alpha: tuple
    q: int

    def describe(self):
        names = [v.name for v in _vars(self.term)]
        sub = ",".join(f"{n}:{s}" for n, s in zip(names, self.alpha))
        return f"eval[{show(self.term)}]{{{sub}}}->{self.q}"


@dataclass(frozen=True, slots=True)
class NfReach:
    """Product state ``(q, d)`` is reached by some normal form of left depth ``d``."""

    q: int
    d: int

    def describe(self):
        return f"nf({self.q},{self.d})"


def _vars(t):
    """Variables of ``t`` sorted by index (x1 < x2 < ...)."""
    seen = set()
    stack = [t]
    while stack:
        n = stack.pop()
        if type(n) is App:
            stack += [n.left, n.right]
        elif type(n) is Var:
            seen.add(n)
    return tuple(sorted(seen, key=lambda v: int(v.name[1:])))


def _check_size(rule, n):
    if n < rule.arity + 1:
        raise InvalidInput(
            f"{rule.name}: need at least {rule.arity + 1} states to recognise a redex, got {n}")


def _transitions(b, states):
    leaf = {q: b.var(TransLeaf(q)) for q in states}
    app = {}
    for q1 in states:
        for q2 in states:
            for q in states:
                app[q1, q2, q] = b.var(TransApp(q1, q2, q))
    return leaf, app


def _eval_vars(b, rule, states, values, leaf, app):
    """Allocate Eval variables and their defining clauses.

    ``values`` is the range of substitutions.  Returns a lookup
    ``(term, alpha) -> {q: literal}``.
    """
    ev = {}
    for t in rule.subterms:
        vs = _vars(t)
        for alpha in itertools.product(values, repeat=len(vs)):
            row = {}
            for q in states:
                key = Eval(t, alpha, q)
                row[q] = b.alias(key, leaf[q]) if type(t) is Leaf else b.var(key)
            ev[t, alpha] = row

    # variable leaves: a state constant runs to itself only
    for x in rule.variables:
        for a in values:
            row = ev[x, (a,)]
            for q in states:
                b.add(row[q] if q == a else -row[q])

    # internal nodes: eval <-> OR over transitions of (eval left & eval right & rule)
    and_gate = b.and_gate
    iff_or = b.iff_or
    for t in rule.subterms:
        if type(t) is not App:
            continue
        vs = _vars(t)
        v1, v2 = _vars(t.left), _vars(t.right)
        for alpha in itertools.product(values, repeat=len(vs)):
            amap = dict(zip(vs, alpha))
            row1 = ev[t.left, tuple(amap[v] for v in v1)]
            row2 = ev[t.right, tuple(amap[v] for v in v2)]
            row = ev[t, alpha]
            for q in states:
                disj = []
                for q1 in states:
                    e1 = row1[q1]
                    for q2 in states:
                        lits = {e1, row2[q2], app[q1, q2, q]}
                        disj.append(and_gate(lits) if len(lits) > 1 else lits.pop())
                iff_or(row[q], disj)
    return ev


def _closure_clauses(b, rule, states, values, escape, ev):
    lvars = _vars(rule.lhs)
    rvars = _vars(rule.rhs)
    for alpha in itertools.product(values, repeat=len(lvars)):
        amap = dict(zip(lvars, alpha))
        lrow = ev[rule.lhs, alpha]
        rrow = ev[rule.rhs, tuple(amap[v] for v in rvars)]
        for q in states:
            lits = [-lrow[q], rrow[q]]
            if rrow[escape] not in lits:
                lits.append(rrow[escape])
            b.add(*lits)


def encode_tdas(rule: CombinatorRule, n: int) -> CnfInstance:
    """CNF satisfiable iff an ``n``-state TDAS (final sink state ``n``) exists."""
    _check_size(rule, n)
    b = CnfBuilder()
    states = range(1, n + 1)
    qf = n
    inner = range(1, n)
    m_z = rule.arity
    leaf, app = _transitions(b, states)

    ml = {}
    for q in inner:
        ml[q, 0] = b.alias(MinLd(q, 0), leaf[q])
        for m in range(1, m_z):
            ml[q, m] = b.var(MinLd(q, m))
    rdx = {q: b.var(Redex(q)) for q in states}
    ev = _eval_vars(b, rule, states, inner, leaf, app)

    # final state is a sink
    for q1 in states:
        for q2 in states:
            if qf in (q1, q2):
                b.add(app[q1, q2, qf])
                for q in inner:
                    b.add(-app[q1, q2, q])
    # every state reachable through the fixed order
    for q in states:
        b.add(leaf[q], *[app[q1, q2, q] for q1 in range(1, q) for q2 in range(1, q)])
    b.add(rdx[qf])
    # minimum left depth; minld(q) = 0 shares the leaf-rule variable
    for q in inner:
        for m in range(1, m_z):
            parts = [-leaf[q]]
            for k in range(m - 1):
                for q1 in inner:
                    for q2 in inner:
                        parts.append(b.or_gate([-app[q1, q2, q], -ml[q1, k]]))
            some = [b.and_gate([app[q1, q2, q], ml[q1, m - 1]]) for q1 in inner for q2 in inner]
            parts.append(b.or_gate(some) if len(some) > 1 else some[0])
            b.iff_and(ml[q, m], parts)
    # redex states: no leaf rule, and non-redex children force a redex at the root
    for q in states:
        b.add(-rdx[q], -leaf[q])
    for q in states:
        for q1 in inner:
            for q2 in inner:
                lits = [-rdx[q], -app[q1, q2, q], rdx[q1]]
                if q2 != q1:
                    lits.append(rdx[q2])
                lits.append(ml[q1, m_z - 1])
                b.add(*lits)
    _closure_clauses(b, rule, states, inner, qf, ev)
    return b.build({"rule": rule.name, "arity": m_z, "N": n, "method": "tdas"})


def encode_tda_baseline(rule: CombinatorRule, n: int) -> CnfInstance:
    """CNF for an ``n``-state TDA with final state ``n`` and no sink."""
    _check_size(rule, n)
    b = CnfBuilder()
    states = range(1, n + 1)
    m_z = rule.arity
    leaf, app = _transitions(b, states)
    nf = {(q, d): b.var(NfReach(q, d)) for q in states for d in range(m_z)}
    ev = _eval_vars(b, rule, states, states, leaf, app)

    for q in states:
        b.add(leaf[q], *[app[q1, q2, q] for q1 in range(1, q) for q2 in range(1, q)])
    # over-approximate the normal-form product and forbid it at the final state
    for q in states:
        b.add(-leaf[q], nf[q, 0])
    for (q1, q2, q), t in app.items():
        for d1 in range(m_z - 1):
            for d2 in range(m_z):
                b.add(-nf[q1, d1], -nf[q2, d2], -t, nf[q, d1 + 1])
    for d in range(m_z):
        b.add(-nf[n, d])
    _closure_clauses(b, rule, states, states, n, ev)
    return b.build({"rule": rule.name, "arity": m_z, "N": n, "method": "tda-baseline"})


def cnf_stats(instance: CnfInstance) -> dict:
    return instance.stats()


def eval_variable_count(instance: CnfInstance) -> int:
    """Number of Eval keys (shared leaf-rule aliases included)."""
    return sum(1 for k in instance.index if type(k) is Eval)


def decode_automaton(instance: CnfInstance, model: Model) -> TreeAutomaton:
    """Read the transition relation off a model; the final state is ``N``."""
    if model.num_vars != instance.num_vars:
        raise ModelInconsistent(
            f"assignment covers {model.num_vars} of {instance.num_vars} variables")
    instance.check(model)
    n = instance.meta["N"]
    leaf = set()
    app = set()
    for key, i in instance.index.items():
        if type(key) is TransLeaf and model[i]:
            leaf.add(key.q)
        elif type(key) is TransApp and model[i]:
            app.add((key.q1, key.q2, key.q))
    return TreeAutomaton(n, {n}, leaf, app, instance.meta.get("rule", "Z"))


def oracle_mismatches(instance: CnfInstance, model: Model, A: TreeAutomaton,
                      rule: CombinatorRule) -> list:
    """Compare auxiliary variable values with direct computations on ``A``.

    MinLd must equal the minimum-left-depth fixpoint, Redex must imply
    normal-form emptiness, and Eval must equal the run of the instantiated
    subterm.  Returns human-readable mismatch descriptions.
    """
    out = []
    depth = minld(A)
    redex_ok = {}
    for key, i in instance.index.items():
        kind = type(key)
        value = model[i]
        if kind is MinLd:
            expect = depth[key.q] == key.m
            if value != expect:
                out.append(f"{key.describe()} is {value}, minld is {depth[key.q]}")
        elif kind is Redex and value:
            if key.q not in redex_ok:
                redex_ok[key.q] = nf_intersection_empty(A, rule, {key.q})[0]
            if not redex_ok[key.q]:
                out.append(f"{key.describe()} is true but state {key.q} accepts a normal form")
        elif kind is Eval:
            alpha = dict(zip(_vars(key.term), key.alpha))
            expect = key.q in run_open(A, key.term, alpha)
            if value != expect:
                out.append(f"{key.describe()} is {value}, run says {expect}")
    return out


def pin_automaton(instance: CnfInstance, A: TreeAutomaton) -> CnfInstance:
    """Add unit clauses fixing every transition variable to ``A``'s rules.

    ``A`` is first renumbered along a reachability order ending in its final
    state, so it matches the encoding's state numbering.
    """
    n = instance.meta["N"]
    if A.n != n:
        raise InvalidInput(f"automaton has {A.n} states, instance expects {n}")
    order = reachability_order(A)
    B = renumber(A, {q: i for i, q in enumerate(order, 1)})
    lits = array("i", instance.lits)
    count = instance.num_clauses
    for key, i in instance.index.items():
        if type(key) is TransLeaf:
            lits.extend((i if key.q in B.leaf else -i, 0))
            count += 1
        elif type(key) is TransApp:
            lits.extend((i if (key.q1, key.q2, key.q) in B.app else -i, 0))
            count += 1
    meta = dict(instance.meta, pinned=True)
    return CnfInstance(instance.num_vars, lits, count, instance.index, instance.gates, meta)
