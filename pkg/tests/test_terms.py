import pytest
from hypothesis import given, settings, strategies as st

from nonterm.combinators import RULES, get_rule
from nonterm.errors import InvalidRule, ParseError, UnknownSymbol
from nonterm.terms import (
    App, Leaf, Var, all_terms, contract, free_vars, innermost_successors, is_normal_form,
    is_redex, ldepth, parse_rule, parse_term, rewrite_successors, show, spine_args, subterms,
)

P = get_rule("P")


def terms(leaf=Leaf("P")):
    return st.recursive(st.just(leaf), lambda kids: st.builds(App, kids, kids), max_leaves=30)


def test_parse_rule_p():
    r = parse_rule("P x y z -> z (x y z)")
    assert r.name == "P"
    assert r.arity == 3
    x1, x2, x3 = r.variables
    assert r.rhs == App(x3, App(App(x1, x2), x3))
    assert str(r) == "P x y z -> z (x y z)"


def test_registry_has_ten_rules():
    assert list(RULES) == ["P", "P3", "D1", "D2", "Phi", "Phi2", "S1", "S2", "S3", "S4"]
    arities = {n: get_rule(n).arity for n in RULES}
    assert arities == {"P": 3, "P3": 3, "D1": 4, "D2": 4, "Phi": 4, "Phi2": 5,
                       "S1": 4, "S2": 4, "S3": 5, "S4": 5}


def test_get_rule_parses_unregistered_text():
    r = get_rule("W x y -> x y y")
    assert r.name == "W" and r.arity == 2


@pytest.mark.parametrize("text, exc", [
    ("P x y", ParseError),
    ("P x x -> x", InvalidRule),
    ("P x y -> x", InvalidRule),           # erasing
    ("P x y -> x w y", InvalidRule),       # unknown variable
    ("P x y -> P x y", InvalidRule),
    ("P x y -> x (y", ParseError),
])
def test_bad_rules(text, exc):
    with pytest.raises(exc):
        parse_rule(text)


def test_parse_term_and_unknown_symbol():
    assert parse_term("P P (P P)", P) == App(App(Leaf("P"), Leaf("P")), App(Leaf("P"), Leaf("P")))
    with pytest.raises(UnknownSymbol):
        parse_term("P Q", P)
    with pytest.raises(ParseError):
        parse_term("P (P", P)


@given(terms())
@settings(max_examples=200)
def test_show_parse_roundtrip(t):
    assert parse_term(show(t), P) == t


def test_show_is_left_associative():
    t = App(App(Leaf("P"), Leaf("P")), App(Leaf("P"), App(Leaf("P"), Leaf("P"))))
    assert show(t) == "P P (P (P P))"


def test_ldepth_and_redex():
    t = parse_term("P P P P", P)
    assert ldepth(t) == 3
    assert is_redex(t, P)
    assert not is_redex(parse_term("P P P", P), P)
    assert is_normal_form(parse_term("P P (P P)", P), P)
    assert not is_normal_form(parse_term("P (P P P P)", P), P)


def test_contract_single_step():
    t = parse_term("P P P P", P)
    assert show(contract(t, P)) == "P (P P P)"
    assert [show(s) for s in innermost_successors(t, P)] == ["P (P P P)"]


def test_innermost_excludes_outer_redex_with_redex_argument():
    t = parse_term("P P P (P P P P)", P)
    inner = innermost_successors(t, P)
    full = rewrite_successors(t, P)
    assert len(full) == 2
    assert [show(s) for s in inner] == ["P P P (P (P P P))"]


def test_spine_args():
    t = parse_term("P (P P) P", P)
    assert [show(a) for a in spine_args(t)] == ["P P", "P"]


def test_subterms_of_p_rule():
    # the distinct subterms of both sides of P's rule
    seen = []
    for t in list(subterms(P.lhs)) + list(subterms(P.rhs)):
        if t not in seen:
            seen.append(t)
    assert len(seen) == 10
    assert tuple(seen) == P.subterms


def test_free_vars_order():
    x1, x2, x3 = P.variables
    assert free_vars(P.rhs) == (x3, x1, x2)
    assert free_vars(Leaf("P")) == ()


@pytest.mark.parametrize("n, catalan", [(1, 1), (2, 1), (3, 2), (4, 5), (5, 14), (6, 42), (7, 132)])
def test_all_terms_counts_are_catalan(n, catalan):
    got = list(all_terms(Leaf("P"), n))
    assert len(got) == catalan
    assert len(set(got)) == catalan
    assert all(t.size == n for t in got)


@given(terms())
@settings(max_examples=200)
def test_normal_form_iff_no_successor(t):
    assert is_normal_form(t, P) == (not rewrite_successors(t, P))
    assert is_normal_form(t, P) == (not innermost_successors(t, P))


def test_terms_are_immutable_and_hashable():
    t = App(Leaf("P"), Var("x1"))
    with pytest.raises(AttributeError):
        t.left = Leaf("Q")
    assert hash(t) == hash(App(Leaf("P"), Var("x1")))
    assert t != App(Leaf("P"), Leaf("x1"))


def test_deep_terms_do_not_overflow():
    t = Leaf("P")
    for _ in range(50_000):
        t = App(t, Leaf("P"))
    assert t.ldepth == 50_000
    assert len(show(t).split()) == 50_001
