"""Bottom-up tree automata over the signature {Z/0, A/2}.

States are the integers ``1..n``.  Besides membership and reachability this
module holds the exact verifiers used to certify a termination disproof:
the normal-form emptiness test (product with the left-depth automaton), the
closure test over state substitutions, and the shortest-term extraction used
to print counterexamples.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

from .errors import InvalidInput, ParseError
from .terms import App, CombinatorRule, Leaf, Term, Var, free_vars, show

__all__ = [
    "TreeAutomaton", "Condition", "VerificationReport", "sink_rules",
    "run", "run_open", "accepts", "reachable_states", "is_sink", "minld",
    "nf_intersection_empty", "closure_check", "verify_tdas", "verify_tda",
    "smallest_accepted_term", "smallest_terms", "reachability_order",
    "renumber", "restrict", "parse_automaton", "serialize_automaton",
]


@dataclass(frozen=True)
class TreeAutomaton:
    n: int
    final: frozenset
    leaf: frozenset
    app: frozenset
    leaf_name: str = field(default="Z", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "final", frozenset(self.final))
        object.__setattr__(self, "leaf", frozenset(self.leaf))
        object.__setattr__(self, "app", frozenset(tuple(r) for r in self.app))
        if self.n < 1:
            raise InvalidInput("an automaton needs at least one state")
        if not self.final:
            raise InvalidInput("the final-state set must be non-empty")
        ok = range(1, self.n + 1)
        used = set(self.final) | set(self.leaf)
        for r in self.app:
            used.update(r)
        bad = sorted(q for q in used if q not in ok)
        if bad:
            raise InvalidInput(f"states {bad} outside 1..{self.n}")

    @property
    def states(self) -> range:
        return range(1, self.n + 1)

    @cached_property
    def delta(self) -> dict:
        """``(q1, q2) -> frozenset`` of targets."""
        out = {}
        for q1, q2, q in self.app:
            out.setdefault((q1, q2), set()).add(q)
        return {k: frozenset(v) for k, v in out.items()}

    @property
    def final_state(self) -> int:
        if len(self.final) != 1:
            raise InvalidInput(f"expected a single final state, got {sorted(self.final)}")
        return next(iter(self.final))

    def with_rules(self, app=(), leaf=()) -> "TreeAutomaton":
        return TreeAutomaton(self.n, self.final, self.leaf | set(leaf),
                             self.app | set(app), self.leaf_name)

    def without_rules(self, app=(), leaf=()) -> "TreeAutomaton":
        return TreeAutomaton(self.n, self.final, self.leaf - set(leaf),
                             self.app - set(app), self.leaf_name)

    def with_final(self, final) -> "TreeAutomaton":
        return TreeAutomaton(self.n, frozenset(final), self.leaf, self.app, self.leaf_name)

    def __str__(self):
        return serialize_automaton(self)


def sink_rules(n: int, q: int) -> set:
    """The rules ``A(q1,q2) -> q`` for every pair containing ``q``."""
    return {(a, b, q) for a in range(1, n + 1) for b in range(1, n + 1) if q in (a, b)}


# ---------------------------------------------------------------------------
# Runs

def _post(delta, s1, s2):
    out = set()
    for a in s1:
        for b in s2:
            t = delta.get((a, b))
            if t:
                out |= t
    return frozenset(out)


def run_open(A: TreeAutomaton, t: Term, alpha: Optional[dict] = None) -> frozenset:
    """States reachable from ``t`` where each variable stands for a state."""
    delta = A.delta
    leaf = A.leaf
    memo = {}
    stack = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        key = id(node)
        if key in memo:
            continue
        if type(node) is App:
            if not expanded:
                stack += [(node, True), (node.right, False), (node.left, False)]
                continue
            memo[key] = _post(delta, memo[id(node.left)], memo[id(node.right)])
        elif type(node) is Var:
            memo[key] = frozenset([alpha[node]])
        else:
            memo[key] = leaf
    return memo[id(t)]


def run(A: TreeAutomaton, t: Term) -> frozenset:
    """The exact set ``{q | t =>* q}``."""
    return run_open(A, t)


def accepts(A: TreeAutomaton, t: Term) -> bool:
    return bool(run(A, t) & A.final)


def reachable_states(A: TreeAutomaton) -> frozenset:
    reach = set(A.leaf)
    changed = True
    while changed:
        changed = False
        for q1, q2, q in A.app:
            if q not in reach and q1 in reach and q2 in reach:
                reach.add(q)
                changed = True
    return frozenset(reach)


def is_sink(A: TreeAutomaton, q: int) -> bool:
    delta = A.delta
    for a in A.states:
        for b in (A.states if a == q else (q,)):
            if delta.get((a, b), frozenset()) != {q}:
                return False
    return True


def minld(A: TreeAutomaton) -> dict:
    """Minimum left depth of a term accepted at each state (``inf`` if none)."""
    reach = reachable_states(A)
    best = {q: math.inf for q in A.states}
    for q in A.leaf:
        best[q] = 0
    changed = True
    while changed:
        changed = False
        for q1, q2, q in A.app:
            if q2 in reach and best[q1] + 1 < best[q]:
                best[q] = best[q1] + 1
                changed = True
    return best


def reachability_order(A: TreeAutomaton, last: Optional[int] = None) -> list:
    """A state order in which each state has a leaf rule or a rule from
    strictly smaller states; ``last`` (default: the final state) is placed at
    the end.  Raises if some state is unreachable."""
    if last is None:
        last = A.final_state
    order = sorted(q for q in A.leaf if q != last)
    placed = set(order)
    changed = True
    while changed:
        changed = False
        for q1, q2, q in sorted(A.app):
            if q != last and q not in placed and q1 in placed and q2 in placed:
                order.append(q)
                placed.add(q)
                changed = True
    if len(order) != A.n - 1:
        raise InvalidInput("not every state is reachable without the final state")
    if last not in A.leaf and not any(
        q == last and q1 in placed and q2 in placed for q1, q2, q in A.app
    ):
        raise InvalidInput(f"state {last} is not reachable from the other states")
    return order + [last]


def renumber(A: TreeAutomaton, mapping: dict) -> TreeAutomaton:
    """Rename states through the bijection ``mapping``."""
    return TreeAutomaton(
        A.n,
        {mapping[q] for q in A.final},
        {mapping[q] for q in A.leaf},
        {(mapping[a], mapping[b], mapping[c]) for a, b, c in A.app},
        A.leaf_name,
    )


def restrict(A: TreeAutomaton, keep: Iterable[int], final=None) -> TreeAutomaton:
    """Sub-automaton on ``keep``, renumbered 1..k in increasing order."""
    keep = sorted(set(keep))
    idx = {q: i for i, q in enumerate(keep, 1)}
    final = A.final if final is None else final
    return TreeAutomaton(
        len(keep),
        {idx[q] for q in final if q in idx},
        {idx[q] for q in A.leaf if q in idx},
        {(idx[a], idx[b], idx[c]) for a, b, c in A.app if a in idx and b in idx and c in idx},
        A.leaf_name,
    )


# ---------------------------------------------------------------------------
# Shortest terms

def _smallest(leaf_states, app_rules, leaf: Leaf) -> dict:
    """Per state, the term with fewest leaves, ties broken by printed form.

    Returns ``state -> (size, text, term)``.  Minimal terms are built from
    minimal children, and no printed term is a proper prefix of another with
    the same leaf count, so comparing ``(size, text)`` locally is exact.
    """
    best = {s: (1, leaf.name, leaf) for s in leaf_states}
    rules = list(app_rules)
    changed = True
    while changed:
        changed = False
        for a, b, s in rules:
            ba = best.get(a)
            bb = best.get(b)
            if ba is None or bb is None:
                continue
            size = ba[0] + bb[0]
            cur = best.get(s)
            if cur is not None and size > cur[0]:
                continue
            right = bb[1] if bb[0] == 1 else f"({bb[1]})"
            text = f"{ba[1]} {right}"
            if cur is None or (size, text) < cur[:2]:
                best[s] = (size, text, App(ba[2], bb[2]))
                changed = True
    return best


def smallest_terms(A: TreeAutomaton) -> dict:
    """``state -> smallest term`` for every reachable state."""
    return {q: v[2] for q, v in _smallest(A.leaf, A.app, Leaf(A.leaf_name)).items()}


def smallest_accepted_term(A: TreeAutomaton, leaf_name: Optional[str] = None) -> Optional[Term]:
    """A term of minimum leaf count in L(A); ``None`` if the language is empty."""
    best = _smallest(A.leaf, A.app, Leaf(leaf_name or A.leaf_name))
    hits = [best[q] for q in A.final if q in best]
    if not hits:
        return None
    return min(hits, key=lambda v: v[:2])[2]


# ---------------------------------------------------------------------------
# Verification

@dataclass
class Condition:
    name: str
    passed: bool
    witness: object = None
    note: str = ""

    def describe(self) -> str:
        status = "pass" if self.passed else "FAIL"
        text = f"{self.name:<16} {status}"
        if self.note:
            text += f"  ({self.note})"
        if self.witness is not None:
            w = self.witness
            if isinstance(w, (Leaf, App)):
                w = show(w)
            text += f"  witness: {w}"
        return text


@dataclass
class VerificationReport:
    kind: str
    conditions: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self) -> list:
        return [c.name for c in self.conditions if not c.passed]

    def format(self) -> str:
        head = f"{self.kind} verification: {'PASS' if self.passed else 'FAIL'}"
        return "\n".join([head] + ["  " + c.describe() for c in self.conditions])

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "passed": self.passed, "conditions": []}
        for c in self.conditions:
            w = c.witness
            if isinstance(w, (Leaf, App)):
                w = show(w)
            out["conditions"].append({"name": c.name, "passed": c.passed, "witness": w, "note": c.note})
        return out


def nf_intersection_empty(A: TreeAutomaton, rule: CombinatorRule, final=None):
    """Decide ``L(A) ∩ NF = ∅`` exactly.

    Builds the product of ``A`` with the automaton whose states are the left
    depths ``0..M-1`` (it accepts exactly the normal forms).  Returns
    ``(True, None)`` or ``(False, smallest accepted normal form)``.
    """
    final = A.final if final is None else final
    m = rule.arity
    leaf_states = [(q, 0) for q in A.leaf]
    rules = [
        ((q1, d1), (q2, d2), (q, d1 + 1))
        for q1, q2, q in A.app
        for d1 in range(m - 1)
        for d2 in range(m)
    ]
    best = _smallest(leaf_states, rules, Leaf(rule.name))
    hits = [v for (q, d), v in best.items() if q in final]
    if not hits:
        return True, None
    return False, min(hits, key=lambda v: v[:2])[2]


def _closure(A: TreeAutomaton, rule: CombinatorRule, escape: frozenset, values=None):
    """Check ``l·α =>* q`` implies ``r·α =>* q`` or ``r·α =>* e`` (e in escape)
    for every state ``q`` and every ``α: vars -> values`` (default: all states)."""
    delta = A.delta
    xs = rule.variables
    post_memo = {}

    def post(s1, s2):
        key = (s1, s2)
        v = post_memo.get(key)
        if v is None:
            v = post_memo[key] = _post(delta, s1, s2)
        return v

    # rhs as a postorder program over slots
    prog = []
    slot = {}
    for node in _postorder_unique(rule.rhs):
        if type(node) is Var:
            slot[node] = ("var", xs.index(node))
        else:
            i = len(prog)
            prog.append((slot[node.left], slot[node.right]))
            slot[node] = ("app", i)
    root = slot[rule.rhs]
    singles = {q: frozenset([q]) for q in A.states}

    def eval_rhs(alpha):
        vals = []

        def get(s):
            return singles[alpha[s[1]]] if s[0] == "var" else vals[s[1]]

        for a, b in prog:
            vals.append(post(get(a), get(b)))
        return get(root)

    states = list(A.states if values is None else sorted(values))
    alpha = [0] * len(xs)

    def visit(k, current):
        if not current:
            return None
        if k == len(xs):
            rhs = eval_rhs(alpha)
            if rhs & escape:
                return None
            for q in sorted(current):
                if q not in rhs:
                    return q, tuple(alpha)
            return None
        for q in states:
            alpha[k] = q
            w = visit(k + 1, post(current, singles[q]))
            if w:
                return w
        return None

    w = visit(0, A.leaf)
    if w is None:
        return True, None
    q, values = w
    return False, {"state": q, "alpha": dict(zip(rule.var_names, values))}


def _postorder_unique(t):
    seen = set()
    stack = [(t, False)]
    while stack:
        n, expanded = stack.pop()
        if type(n) is App and not expanded:
            stack += [(n, True), (n.right, False), (n.left, False)]
        elif n not in seen:
            seen.add(n)
            yield n


def closure_check(A: TreeAutomaton, rule: CombinatorRule):
    """Closure test for an automaton with a unique sink final state.

    Substitutions range over the non-final states only: the arguments of an
    innermost redex are normal forms, and once ``L(A) ∩ NF = ∅`` holds no
    normal form runs to the final state.  Together with that emptiness the
    test is sufficient (not necessary) for closure of every state language
    under innermost steps with escape to the final language.  Returns
    ``(ok, witness)`` where the witness names a state and a substitution.
    """
    if len(A.final) != 1 or not is_sink(A, A.final_state):
        raise InvalidInput("closure_check needs exactly one final state, and it must be a sink")
    return _closure(A, rule, A.final, set(A.states) - A.final)


def verify_tdas(A: TreeAutomaton, rule: CombinatorRule) -> VerificationReport:
    conds = []
    unique = len(A.final) == 1
    conds.append(Condition("unique_final", unique,
                           None if unique else sorted(A.final)))
    qf = min(A.final)
    sink = unique and is_sink(A, qf)
    conds.append(Condition("sink", sink, None if sink else qf))
    reach = reachable_states(A)
    conds.append(Condition("final_reachable", qf in reach, None if qf in reach else qf))
    missing = sorted(set(A.states) - reach)
    conds.append(Condition("all_reachable", not missing, missing or None))
    ok, witness = nf_intersection_empty(A, rule)
    conds.append(Condition("nf_empty", ok, witness))
    if unique and sink:
        ok, witness = closure_check(A, rule)
        conds.append(Condition("closure", ok, witness, "sufficient condition"))
    else:
        conds.append(Condition("closure", False, None, "requires a unique sink final state"))
    return VerificationReport("TDAS", conds)


def verify_tda(A: TreeAutomaton, rule: CombinatorRule, strict: bool = False) -> VerificationReport:
    """Check the termination-disproving conditions for a general automaton.

    With ``strict`` the closure test demands ``r·α =>* q`` exactly; otherwise
    a right-hand side may instead reach any final state.
    """
    reach = reachable_states(A)
    hit = sorted(A.final & reach)
    conds = [Condition("final_reachable", bool(hit), None if hit else sorted(A.final))]
    ok, witness = nf_intersection_empty(A, rule)
    conds.append(Condition("nf_empty", ok, witness))
    escape = frozenset() if strict else A.final
    ok, witness = _closure(A, rule, escape)
    conds.append(Condition("closure", ok, witness,
                           "strict" if strict else "escape to final states"))
    return VerificationReport("TDA", conds)


# ---------------------------------------------------------------------------
# Text format

_APP_LINE = re.compile(r"^A\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*->\s*(.+)$")
_LEAF_LINE = re.compile(r"^([A-Za-z_][A-Za-z0-9_']*)\s*->\s*(.+)$")


def _targets(text, lineno):
    parts = [p.strip() for p in text.split("|")]
    if not all(p.isdigit() for p in parts):
        raise ParseError(f"line {lineno}: bad right-hand side {text!r}")
    return [int(p) for p in parts]


def parse_automaton(text: str) -> TreeAutomaton:
    """Parse the line-oriented automaton format (``;`` also separates lines)."""
    n = None
    final = None
    sinks = []
    leaf = set()
    app = set()
    leaf_name = None
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        for piece in raw.split("#", 1)[0].split(";"):
            if piece.strip():
                lines.append((lineno, piece.strip()))
    for lineno, line in lines:
        word = line.split(None, 1)
        if word[0] == "states" and len(word) == 2:
            if not word[1].strip().isdigit():
                raise ParseError(f"line {lineno}: bad state count")
            n = int(word[1])
        elif word[0] == "final" and len(word) == 2:
            try:
                final = {int(p) for p in word[1].split(",")}
            except ValueError:
                raise ParseError(f"line {lineno}: bad final-state list") from None
        elif word[0] == "sink" and len(word) == 2:
            if not word[1].strip().isdigit():
                raise ParseError(f"line {lineno}: bad sink state")
            sinks.append(int(word[1]))
        elif (m := _APP_LINE.match(line)):
            q1, q2 = int(m.group(1)), int(m.group(2))
            app.update((q1, q2, q) for q in _targets(m.group(3), lineno))
        elif (m := _LEAF_LINE.match(line)):
            if leaf_name not in (None, m.group(1)):
                raise ParseError(f"line {lineno}: second leaf symbol {m.group(1)!r}")
            leaf_name = m.group(1)
            leaf.update(_targets(m.group(2), lineno))
        else:
            raise ParseError(f"line {lineno}: cannot parse {line!r}")
    if n is None:
        raise ParseError("missing 'states' directive")
    if final is None:
        raise ParseError("missing 'final' directive")
    for q in sinks:
        if not 1 <= q <= n:
            raise ParseError(f"sink state {q} outside 1..{n}")
        app |= sink_rules(n, q)
    try:
        return TreeAutomaton(n, final, leaf, app, leaf_name or "Z")
    except InvalidInput as exc:
        raise ParseError(str(exc)) from None


def serialize_automaton(A: TreeAutomaton) -> str:
    lines = [f"states {A.n}", "final " + ",".join(map(str, sorted(A.final)))]
    covered = set()
    for q in A.states:
        rules = sink_rules(A.n, q)
        if rules <= A.app:
            lines.append(f"sink {q}")
            covered |= rules
    if A.leaf:
        lines.append(f"{A.leaf_name} -> " + "|".join(map(str, sorted(A.leaf))))
    grouped = {}
    for q1, q2, q in A.app - covered:
        grouped.setdefault((q1, q2), []).append(q)
    for (q1, q2), qs in sorted(grouped.items()):
        lines.append(f"A({q1},{q2}) -> " + "|".join(map(str, sorted(qs))))
    return "\n".join(lines) + "\n"
