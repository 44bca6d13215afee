"""Applicative terms over a single combinator and its rewrite rule.

A term is either the combinator constant (:class:`Leaf`), a variable
(:class:`Var`, only in rule sides), or a binary application (:class:`App`).
Terms are immutable; every node caches its leaf count, left depth, the
largest left depth of any of its subterms, and its hash, so the redex and
normal-form predicates are O(1) once a term is built.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import InvalidRule, ParseError, UnknownSymbol

__all__ = [
    "Leaf", "Var", "App", "Term", "CombinatorRule",
    "parse_rule", "parse_term", "show", "ldepth", "is_redex",
    "is_normal_form", "innermost_successors", "rewrite_successors",
    "contract", "substitute", "free_vars", "subterms", "spine_args",
    "build_app", "all_terms",
]


class _Node:
    __slots__ = ()

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, _Node) or hash(self) != hash(other):
            return False
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if type(a) is not type(b) or a._hash != b._hash:
                return False
            if type(a) is App:
                stack.append((a.left, b.left))
                stack.append((a.right, b.right))
            elif a.name != b.name:
                return False
        return True

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return self._hash

    def __setattr__(self, name, value):
        raise AttributeError("terms are immutable")

    def __str__(self):
        return show(self)


class Leaf(_Node):
    """The combinator constant."""

    __slots__ = ("name", "_hash")
    size = 1
    ldepth = 0
    max_ldepth = 0
    ground = True

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("Leaf", name)))

    def __repr__(self):
        return f"Leaf({self.name!r})"

    def __reduce__(self):
        return (Leaf, (self.name,))


class Var(_Node):
    """A rule variable; never part of a ground term."""

    __slots__ = ("name", "_hash")
    size = 1
    ldepth = 0
    max_ldepth = 0
    ground = False

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("Var", name)))

    def __repr__(self):
        return f"Var({self.name!r})"

    def __reduce__(self):
        return (Var, (self.name,))


class App(_Node):
    """Binary application ``left right``."""

    __slots__ = ("left", "right", "size", "ldepth", "max_ldepth", "ground", "_hash")

    def __init__(self, left: Term, right: Term):
        d = left.ldepth + 1
        s = object.__setattr__
        s(self, "left", left)
        s(self, "right", right)
        s(self, "size", left.size + right.size)
        s(self, "ldepth", d)
        s(self, "max_ldepth", max(d, left.max_ldepth, right.max_ldepth))
        s(self, "ground", left.ground and right.ground)
        s(self, "_hash", hash((left._hash, right._hash)))

    def __repr__(self):
        return f"App({self.left!r}, {self.right!r})"

    def __reduce__(self):
        return (App, (self.left, self.right))


Term = Union[Leaf, Var, App]


def build_app(head: Term, *args: Term) -> Term:
    """Left-associated application ``head a1 a2 ...``."""
    for a in args:
        head = App(head, a)
    return head


# ---------------------------------------------------------------------------
# Printing and parsing

def show(t: Term) -> str:
    """Print with juxtaposition, parenthesising only right operands."""
    out = []
    # explicit stack: ("t", term) visits a term, ("s", text) emits text
    stack = [("t", t)]
    while stack:
        kind, item = stack.pop()
        if kind == "s":
            out.append(item)
        elif type(item) is App:
            r = item.right
            if type(r) is App:
                stack += [("s", ")"), ("t", r), ("s", " (")]
            else:
                stack += [("s", r.name), ("s", " ")]
            stack.append(("t", item.left))
        else:
            out.append(item.name)
    return "".join(out)


_TOKEN = re.compile(r"\s*(?:(->)|([()])|([A-Za-z_][A-Za-z0-9_']*)|(\S))")


def _tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.group(4) is not None:
            raise ParseError(f"unexpected character {m.group(4)!r}", text, m.start(4))
        tok = m.group(1) or m.group(2) or m.group(3)
        tokens.append((tok, m.start(m.lastindex)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text, tokens, make_atom):
        self.text = text
        self.tokens = tokens
        self.i = 0
        self.make_atom = make_atom

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def expr(self):
        head = self.atom()
        while self.peek() not in (None, ")", "->"):
            head = App(head, self.atom())
        return head

    def atom(self):
        if self.i >= len(self.tokens):
            raise ParseError("unexpected end of input", self.text, len(self.text))
        tok, pos = self.tokens[self.i]
        self.i += 1
        if tok == "(":
            inner = self.expr()
            if self.peek() != ")":
                raise ParseError("expected ')'", self.text, self._pos())
            self.i += 1
            return inner
        if tok in (")", "->"):
            raise ParseError(f"unexpected {tok!r}", self.text, pos)
        return self.make_atom(tok, pos)

    def _pos(self):
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def done(self):
        if self.i != len(self.tokens):
            raise ParseError(f"trailing input {self.peek()!r}", self.text, self._pos())


# ---------------------------------------------------------------------------
# Rules

@dataclass(frozen=True)
class CombinatorRule:
    """The single rule ``Z x1 ... xM -> rhs`` of a sole combinatory calculus.

    Variables are stored as ``x1..xM`` regardless of the surface names,
    which are kept in ``var_names`` for display only.
    """

    name: str
    arity: int
    lhs: Term
    rhs: Term
    var_names: tuple
    subterms: tuple

    @property
    def constant(self) -> Leaf:
        return Leaf(self.name)

    @property
    def variables(self) -> tuple:
        return tuple(Var(f"x{i}") for i in range(1, self.arity + 1))

    def __str__(self):
        names = dict(zip((f"x{i}" for i in range(1, self.arity + 1)), self.var_names))

        def rename(t):
            if type(t) is Var:
                return Var(names[t.name])
            if type(t) is App:
                return App(rename(t.left), rename(t.right))
            return t

        return f"{self.name} {' '.join(self.var_names)} -> {show(rename(self.rhs))}"


def _make_rule(name, var_names, rhs_surface):
    if len(set(var_names)) != len(var_names):
        raise InvalidRule(f"{name}: left-hand side repeats a variable (non-linear)")
    if name in var_names:
        raise InvalidRule(f"{name}: combinator name used as a variable")
    internal = {v: Var(f"x{i}") for i, v in enumerate(var_names, 1)}

    def convert(t):
        if type(t) is App:
            return App(convert(t.left), convert(t.right))
        if t.name == name:
            raise InvalidRule(f"{name}: right-hand side may only use variables")
        if t.name not in internal:
            raise InvalidRule(f"{name}: right-hand side uses unknown variable {t.name!r}")
        return internal[t.name]

    rhs = convert(rhs_surface)
    missing = [v for v in var_names if internal[v] not in set(_leaves(rhs))]
    if missing:
        raise InvalidRule(f"{name}: erasing rule, {', '.join(missing)} absent from right-hand side")
    lhs = build_app(Leaf(name), *internal.values())
    subs = []
    seen = set()
    for t in list(subterms(lhs)) + list(subterms(rhs)):
        if t not in seen:
            seen.add(t)
            subs.append(t)
    return CombinatorRule(name, len(var_names), lhs, rhs, tuple(var_names), tuple(subs))


def parse_rule(text: str) -> CombinatorRule:
    """Parse ``NAME v1 .. vn -> expr`` into a validated rule."""
    tokens = _tokenize(text)
    words = [t for t, _ in tokens]
    if "->" not in words:
        raise ParseError("rule must contain '->'", text)
    arrow = words.index("->")
    head = words[:arrow]
    if len(head) < 2:
        raise ParseError("rule needs a combinator name and at least one variable", text)
    for tok, pos in tokens[:arrow]:
        if tok in ("(", ")"):
            raise ParseError("left-hand side must be NAME followed by variables", text, pos)
    if arrow + 1 == len(tokens):
        raise ParseError("empty right-hand side", text, len(text))
    parser = _Parser(text, tokens[arrow + 1:], lambda tok, pos: Var(tok))
    rhs = parser.expr()
    parser.done()
    return _make_rule(head[0], head[1:], rhs)


def parse_term(text: str, rule: CombinatorRule) -> Term:
    """Parse a ground term whose only constant is the rule's combinator."""

    def atom(tok, pos):
        if tok != rule.name:
            raise UnknownSymbol(f"unknown symbol {tok!r}", text, pos)
        return Leaf(tok)

    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty term", text, 0)
    parser = _Parser(text, tokens, atom)
    t = parser.expr()
    parser.done()
    return t


# ---------------------------------------------------------------------------
# Structure

def _leaves(t):
    stack = [t]
    while stack:
        n = stack.pop()
        if type(n) is App:
            stack += [n.right, n.left]
        else:
            yield n


def subterms(t: Term) -> Iterator[Term]:
    """Postorder (left, right, node) enumeration of all subterm occurrences."""
    stack = [(t, False)]
    while stack:
        n, expanded = stack.pop()
        if type(n) is App and not expanded:
            stack += [(n, True), (n.right, False), (n.left, False)]
        else:
            yield n


def free_vars(t: Term) -> tuple:
    """Variables of ``t`` in left-to-right order, without repetition."""
    out = []
    for leaf in _leaves(t):
        if type(leaf) is Var and leaf not in out:
            out.append(leaf)
    return tuple(out)


def substitute(t: Term, alpha: dict) -> Term:
    if type(t) is Var:
        return alpha[t]
    if type(t) is App:
        return App(substitute(t.left, alpha), substitute(t.right, alpha))
    return t


def ldepth(t: Term) -> int:
    return t.ldepth


def is_redex(t: Term, rule: CombinatorRule) -> bool:
    return t.ldepth == rule.arity


def is_normal_form(t: Term, rule: CombinatorRule) -> bool:
    return t.max_ldepth < rule.arity


def spine_args(t: Term) -> list:
    """Arguments along the left spine, outermost last."""
    args = []
    while type(t) is App:
        args.append(t.right)
        t = t.left
    args.reverse()
    return args


def contract(t: Term, rule: CombinatorRule) -> Term:
    """Rewrite the redex ``t`` at its root."""
    if not is_redex(t, rule):
        raise ValueError(f"{show(t)} is not a redex")
    return substitute(rule.rhs, dict(zip(rule.variables, spine_args(t))))


def _successors(t, rule, innermost):
    out = []
    if type(t) is not App:
        return out
    if t.ldepth == rule.arity and (
        not innermost or all(a.max_ldepth < rule.arity for a in spine_args(t))
    ):
        out.append(contract(t, rule))
    if t.left.max_ldepth >= rule.arity:
        out += [App(l, t.right) for l in _successors(t.left, rule, innermost)]
    if t.right.max_ldepth >= rule.arity:
        out += [App(t.left, r) for r in _successors(t.right, rule, innermost)]
    return out


def innermost_successors(t: Term, rule: CombinatorRule) -> list:
    """All one-step innermost reducts, in preorder of the contracted position."""
    return _successors(t, rule, True)


def rewrite_successors(t: Term, rule: CombinatorRule) -> list:
    """All one-step reducts, in preorder of the contracted position."""
    return _successors(t, rule, False)


def all_terms(leaf: Leaf, size: int) -> Iterator[Term]:
    """Every ground term with exactly ``size`` leaves."""
    if size == 1:
        yield leaf
        return
    for k in range(1, size):
        for left in all_terms(leaf, k):
            for right in all_terms(leaf, size - k):
                yield App(left, right)
