import io
import itertools

import pytest
from hypothesis import given, settings, strategies as st

from nonterm.cnf import CnfBuilder, CnfInstance, Model, dimacs_text, read_dimacs, write_dimacs
from nonterm.combinators import get_rule
from nonterm.encoding import encode_tdas
from nonterm.errors import ModelInconsistent, ParseError

from helpers import brute_force_sat

NV = 4


def test_dimacs_exact_bytes():
    inst = CnfInstance.from_clauses([[1, -2]], num_vars=2)
    buf = io.BytesIO()
    n = write_dimacs(inst, buf)
    assert buf.getvalue() == b"p cnf 2 1\n1 -2 0\n"
    assert n == len(buf.getvalue())


def test_empty_instance():
    inst = CnfBuilder().build()
    assert dimacs_text(inst) == "p cnf 0 0\n"
    assert inst.stats() == {"variables": 0, "clauses": 0}


def test_empty_clauses_serialise():
    inst = CnfInstance.from_clauses([[], [], [1]], num_vars=1)
    assert dimacs_text(inst) == "p cnf 1 3\n0\n0\n1 0\n"


def test_dimacs_roundtrip_encoding(tmp_path):
    inst = encode_tdas(get_rule("P"), 4)
    path = tmp_path / "p4.cnf"
    write_dimacs(inst, str(path))
    back = read_dimacs(str(path))
    assert back.num_vars == inst.num_vars and back.num_clauses == inst.num_clauses
    assert list(back.clauses()) == list(inst.clauses())
    # deterministic bytes
    assert dimacs_text(encode_tdas(get_rule("P"), 4)) == path.read_text()


@pytest.mark.parametrize("text", [
    "1 2 0\n",                      # no header
    "p cnf 2 2\n1 2 0\n",           # clause count mismatch
    "p cnf 1 1\n1 2 0\n",           # variable out of range
    "p cnf 2 1\n1 x 0\n",
    "p cnf 2 1\n1 2\n",             # unterminated
    "p dnf 2 1\n1 0\n",
])
def test_read_dimacs_errors(text):
    with pytest.raises(ParseError):
        read_dimacs(text)


def test_read_dimacs_comments():
    inst = read_dimacs("c hello\np cnf 3 2\n1 -3\n 0 2\n0\n")
    assert list(inst.clauses()) == [(1, -3), (2,)]


def test_model_defaults_and_checks():
    m = Model.from_literals(3, [1, -2, 7])
    assert m[1] and not m[2] and not m[3] and m[-3]
    assert m.true_vars() == [1]
    inst = CnfInstance.from_clauses([[1, 2], [-1, 3], [2, 3]], num_vars=3)
    assert inst.unsatisfied(m) == [1, 2]
    with pytest.raises(ModelInconsistent):
        inst.check(m)
    with pytest.raises(ModelInconsistent):
        inst.check(Model.from_literals(2, [1]))


def test_var_map_lists_aliases():
    b = CnfBuilder()
    v = b.var("leaf")
    b.alias("eval-leaf", v)
    g = b.and_gate([v, b.var("other")])
    lines = list(b.build().var_map_lines())
    assert lines[0] == "1\tleaf = eval-leaf"
    assert lines[g - 1].startswith(f"{g}\taux and(")


def test_gates_are_hash_consed():
    b = CnfBuilder()
    x, y = b.var("x"), b.var("y")
    assert b.and_gate([x, y]) == b.and_gate([y, x])
    assert b.or_gate([x, y]) != b.and_gate([x, y])


# -- Tseitin equisatisfiability against truth tables -----------------------------

formulas = st.recursive(
    st.tuples(st.just("lit"), st.integers(1, NV), st.booleans()),
    lambda kids: st.one_of(
        st.tuples(st.just("and"), st.lists(kids, min_size=2, max_size=3)),
        st.tuples(st.just("or"), st.lists(kids, min_size=2, max_size=3)),
        st.tuples(st.just("not"), kids),
        st.tuples(st.just("iff_or"), kids, st.lists(kids, max_size=2)),
    ),
    max_leaves=6,
)


def evaluate(f, bits):
    kind = f[0]
    if kind == "lit":
        return bits[f[1] - 1] == f[2]
    if kind == "and":
        return all(evaluate(g, bits) for g in f[1])
    if kind == "or":
        return any(evaluate(g, bits) for g in f[1])
    if kind == "not":
        return not evaluate(f[1], bits)
    return evaluate(f[1], bits) == any(evaluate(g, bits) for g in f[2])


def encode(b, f):
    kind = f[0]
    if kind == "lit":
        return f[1] if f[2] else -f[1]
    if kind == "not":
        return -encode(b, f[1])
    if kind == "iff_or":
        # v <-> OR(...) as a fresh defined variable, then compare with the left side
        v = b.new_var()
        b.iff_or(v, [encode(b, g) for g in f[2]])
        left = encode(b, f[1])
        return b.or_gate([b.and_gate([left, v]), b.and_gate([-left, -v])])
    lits = [encode(b, g) for g in f[1]]
    if len(set(lits)) == 1:
        return lits[0]
    return b.and_gate(lits) if kind == "and" else b.or_gate(lits)


@given(formulas)
@settings(max_examples=300, deadline=None)
def test_tseitin_equisatisfiable(f):
    b = CnfBuilder()
    for i in range(1, NV + 1):
        b.var(i)
    root = encode(b, f)
    defs = list(b.build().clauses())
    truth = [evaluate(f, bits) for bits in itertools.product((False, True), repeat=NV)]
    # each input assignment extends to exactly the gate values; root matches the formula
    extra = b.num_vars - NV
    if extra <= 10:
        for bits, expect in zip(itertools.product((False, True), repeat=NV), truth):
            roots = set()
            for aux in itertools.product((False, True), repeat=extra):
                vals = bits + aux
                if all(any(vals[abs(l) - 1] == (l > 0) for l in c) for c in defs):
                    roots.add(vals[abs(root) - 1] == (root > 0))
            assert roots == {expect}
    b.add(root)
    if b.num_vars <= 14:
        assert brute_force_sat(b.num_vars, list(b.build().clauses())) == any(truth)


def test_iff_degenerate_forms():
    b = CnfBuilder()
    v, w = b.var("v"), b.var("w")
    b.iff_or(v, [])
    b.iff_and(w, [])
    inst = b.build()
    assert list(inst.clauses()) == [(-v,), (w,)]
