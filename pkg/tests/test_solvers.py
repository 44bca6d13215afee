import os
import stat
import sys

import pytest
from hypothesis import given, settings, strategies as st

from nonterm.cnf import CnfInstance
from nonterm.combinators import get_rule
from nonterm.encoding import encode_tdas
from nonterm.errors import SpawnError
from nonterm.solvers import (
    Satisfiable, Unknown, Unsatisfiable, default_solver_command, parse_solver_output, solve,
    solve_builtin, solve_external,
)

from conftest import needs_solver
from helpers import brute_force_sat, pigeonhole


def cnf(clauses, n=None):
    return CnfInstance.from_clauses(clauses, num_vars=n)


@pytest.mark.parametrize("backend", ["builtin", pytest.param("external", marks=needs_solver)])
def test_trivial_instances(backend):
    run = solve_builtin if backend == "builtin" else solve_external
    res = run(cnf([[1]]))
    assert isinstance(res, Satisfiable) and res.model[1]
    assert isinstance(run(cnf([[1], [-1]])), Unsatisfiable)
    assert isinstance(run(cnf([[1, 2], [-1], [-2]])), Unsatisfiable)
    assert isinstance(run(cnf([], 0)), Satisfiable)


def test_builtin_empty_clause():
    assert isinstance(solve_builtin(cnf([[1], []])), Unsatisfiable)


def test_builtin_pigeonhole():
    n, clauses = pigeonhole(5)
    assert isinstance(solve_builtin(cnf(clauses, n)), Unsatisfiable)


def test_builtin_conflict_limit():
    n, clauses = pigeonhole(5)
    res = solve_builtin(cnf(clauses, n), conflict_limit=0)
    assert isinstance(res, Unknown) and res.reason == "timeout"
    res = solve_builtin(encode_tdas(get_rule("P3"), 4), conflict_limit=0)
    assert isinstance(res, Unknown)


def test_missing_executable():
    with pytest.raises(SpawnError):
        solve_external(cnf([[1]]), "/nonexistent/solver-binary")


def _script(tmp_path, body):
    path = tmp_path / "fake_solver.py"
    path.write_text(f"#!{sys.executable}\nimport sys, time\n{body}\n")
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return str(path)


def test_external_timeout(tmp_path):
    cmd = _script(tmp_path, "time.sleep(30)")
    res = solve_external(cnf([[1]]), cmd, timeout=0.5)
    assert isinstance(res, Unknown) and res.reason == "timeout"


def test_external_exit_codes_without_status_line(tmp_path):
    cmd = _script(tmp_path, "sys.exit(20)")
    assert isinstance(solve_external(cnf([[1], [-1]]), cmd), Unsatisfiable)


def test_external_garbage_output(tmp_path):
    cmd = _script(tmp_path, "print('hello'); sys.exit(1)")
    res = solve_external(cnf([[1]]), cmd)
    assert isinstance(res, Unknown) and res.reason == "solver-error"


def test_env_override(tmp_path, monkeypatch):
    cmd = _script(tmp_path, "print('s SATISFIABLE'); print('v 1 0'); sys.exit(10)")
    monkeypatch.setenv("NONTERM_SAT_SOLVER", cmd)
    assert default_solver_command() == [cmd]
    assert isinstance(solve(cnf([[1]])), Satisfiable)


def test_parse_output():
    res = parse_solver_output("c hi\ns SATISFIABLE\nv 1 -2\nv 5 0\n", 3, 10)
    assert isinstance(res, Satisfiable)
    # literals beyond V are ignored; unmentioned variables default to false
    assert res.model.num_vars == 3
    assert res.model[1] and not res.model[2] and not res.model[3]
    assert isinstance(parse_solver_output("s UNSATISFIABLE\n", 3, 20), Unsatisfiable)
    assert parse_solver_output("s SATISFIABLE\nv 1 0\n", 1, 20).reason == "solver-error"
    assert parse_solver_output("s SATISFIABLE\n", 1, 10).reason == "solver-error"
    assert parse_solver_output("s UNKNOWN\n", 1, 0).reason == "solver-error"
    assert parse_solver_output("v 1 x 0\n", 1, 10).reason == "solver-error"


def test_solve_builtin_flag():
    assert isinstance(solve(cnf([[1], [-1]]), builtin=True), Unsatisfiable)


clause_sets = st.integers(3, 8).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.lists(st.integers(1, n).flatmap(lambda v: st.sampled_from([v, -v])),
                      min_size=1, max_size=3), min_size=1, max_size=40)))


@given(clause_sets)
@settings(max_examples=200, deadline=None)
def test_builtin_matches_truth_table(data):
    n, clauses = data
    inst = cnf(clauses, n)
    res = solve_builtin(inst)
    assert isinstance(res, (Satisfiable, Unsatisfiable))
    assert isinstance(res, Satisfiable) == brute_force_sat(n, clauses)
    if isinstance(res, Satisfiable):
        assert inst.unsatisfied(res.model) == []


@needs_solver
@given(clause_sets)
@settings(max_examples=40, deadline=None)
def test_backends_agree_random(data):
    n, clauses = data
    inst = cnf(clauses, n)
    a, b = solve_builtin(inst), solve_external(inst)
    assert type(a) is type(b)
    if isinstance(b, Satisfiable):
        assert inst.unsatisfied(b.model) == []


@needs_solver
def test_backends_agree_random_3sat():
    import random
    rng = random.Random(7)
    for _ in range(20):
        n = 60
        clauses = [[rng.choice([v, -v]) for v in rng.sample(range(1, n + 1), 3)] for _ in range(256)]
        inst = cnf(clauses, n)
        a, b = solve_builtin(inst), solve_external(inst)
        assert type(a) is type(b)


@pytest.mark.skipif(os.name != "posix", reason="needs an executable script")
def test_permission_denied(tmp_path):
    path = tmp_path / "not_executable"
    path.write_text("")
    with pytest.raises(SpawnError):
        solve_external(cnf([[1]]), str(path))
