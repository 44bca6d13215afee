"""Random term generators and brute-force oracles shared by the tests."""

import itertools
import random

import numpy as np

from nonterm.automata import smallest_terms
from nonterm.cnf import Model
from nonterm.encoding import Eval, MinLd, Redex, TransApp, TransLeaf, _vars
from nonterm.automata import minld, nf_intersection_empty, run_open
from nonterm.terms import App, Leaf, all_terms


def random_term_at(A, q, rng: random.Random, budget: int):
    """A random term with ``q`` in its run, of roughly ``budget`` leaves."""
    small = smallest_terms(A)
    if q not in small:
        raise ValueError(f"state {q} is unreachable")

    def go(q, budget):
        if budget <= 1:
            return small[q]
        rules = [(a, b) for a, b, c in A.app if c == q and a in small and b in small]
        if not rules or (q in A.leaf and rng.random() < 1.0 / budget):
            return small[q] if q not in A.leaf else Leaf(A.leaf_name)
        a, b = rng.choice(sorted(rules))
        k = rng.randint(1, budget - 1)
        return App(go(a, k), go(b, budget - k))

    return go(q, budget)


def random_context_fill(A, t, rng: random.Random, depth: int):
    """Wrap ``t`` in ``depth`` applications whose other operands have runs."""
    small = smallest_terms(A)
    states = sorted(small)
    for _ in range(depth):
        s = random_term_at(A, rng.choice(states), rng, rng.randint(1, 6))
        t = App(t, s) if rng.random() < 0.5 else App(s, t)
    return t


def terms_up_to(leaf: Leaf, size: int):
    for k in range(1, size + 1):
        yield from all_terms(leaf, k)


def implied_model(instance, A, rule):
    """Assignment derived from ``A`` by direct computation, gates evaluated.

    ``A`` must already be numbered like the encoding (final state ``N``).
    """
    vals = np.zeros(instance.num_vars + 1, dtype=bool)
    depth = minld(A)
    nf_empty = {}
    for key, i in instance.index.items():
        t = type(key)
        if t is TransLeaf:
            vals[i] = key.q in A.leaf
        elif t is TransApp:
            vals[i] = (key.q1, key.q2, key.q) in A.app
        elif t is MinLd:
            vals[i] = depth[key.q] == key.m
        elif t is Redex:
            if key.q not in nf_empty:
                nf_empty[key.q] = nf_intersection_empty(A, rule, {key.q})[0]
            vals[i] = nf_empty[key.q]
        elif t is Eval:
            vals[i] = key.q in run_open(A, key.term, dict(zip(_vars(key.term), key.alpha)))

    def lit(l):
        return vals[l] if l > 0 else not vals[-l]

    for (kind, lits), i in sorted(instance.gates.items(), key=lambda kv: kv[1]):
        vals[i] = all(map(lit, lits)) if kind == "and" else any(map(lit, lits))
    return Model(vals)


def brute_force_sat(num_vars, clauses):
    for bits in itertools.product((False, True), repeat=num_vars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def pigeonhole(holes):
    """``holes + 1`` pigeons into ``holes`` holes (unsatisfiable)."""
    pigeons = holes + 1

    def v(p, h):
        return p * holes + h + 1

    clauses = [[v(p, h) for h in range(holes)] for p in range(pigeons)]
    for h in range(holes):
        for p1 in range(pigeons):
            for p2 in range(p1 + 1, pigeons):
                clauses.append([-v(p1, h), -v(p2, h)])
    return pigeons * holes, clauses
