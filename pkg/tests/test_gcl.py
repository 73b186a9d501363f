import pytest
from hypothesis import given
from hypothesis import strategies as st

from mapcheck import baselines
from mapcheck.builtins import builtin_model
from mapcheck.gcl import (
    LexError,
    ParseError,
    SemanticError,
    compile_model,
    format_model,
    load_gcl,
    parse,
)
from mapcheck.gcl.parser import parse_expr
from mapcheck.gcl.printer import format_expr
from mapcheck.gcl.syntax import Binary, Num, Unary, Var
from mapcheck.model import reachable_states

MINIMAL = "var x:0..1=0; proc P { x==0 -> x:=1 } accept x==1"


def test_minimal_model():
    ast = parse(MINIMAL)
    assert len(ast.variables) == 1
    assert len(ast.processes) == 1
    assert len(ast.processes[0].commands) == 1
    m = compile_model(ast)
    states = reachable_states(m)
    assert len(states) == 2
    assert baselines.bfs_reach(m).transitions == 1
    assert [m.describe(s)["x"] for s in states if m.accepting(s)] == [1]


def test_undeclared_variable_in_accept():
    src = "var x:0..1=0;\nproc P { x==0 -> x:=1 }\naccept y==1"
    with pytest.raises(SemanticError) as info:
        parse(src)
    assert "y" in str(info.value)
    assert (info.value.line, info.value.column) == (3, 8)


@pytest.mark.parametrize("src,exc,line,col", [
    ("var x:0..1=0; proc P { x==0 -> x:=1 } accept x @ 1", LexError, 1, 48),
    ("var x:0..1=0; proc P { x==0 x:=1 }", ParseError, 1, 29),
    ("var x:0..1=2; proc P { x==0 -> x:=1 }", SemanticError, 1, 1),
    ("var x:0..1=0;\nvar x:0..1=0;", SemanticError, 2, 1),
    ("var x:0..1=0; proc P { x==0 -> z:=1 }", SemanticError, 1, 32),
    ("var x:0..1=0; proc P { x==0 -> x:=1, x:=0 }", SemanticError, 1, 38),
])
def test_errors_are_distinct_and_positioned(src, exc, line, col):
    with pytest.raises(exc) as info:
        parse(src)
    assert (info.value.line, info.value.column) == (line, col)
    assert f"{line}:{col}" in str(info.value)


def test_two_processes_merge_in_order():
    m = load_gcl("var x:0..2=0; proc A { x<2 -> x:=x+1 } proc B { x<2 -> x:=x+1 }")
    states = reachable_states(m)
    assert sorted(m.describe(s)["x"] for s in states) == [0, 1, 2]
    (s0,) = m.initial_states()
    # both processes produce x=1; the merged list keeps one copy, A first
    assert [m.describe(t)["x"] for t in m.successors(s0)] == [1]


def test_successor_order_follows_processes():
    m = load_gcl("var x:0..3=0; proc A { x==0 -> x:=2 } proc B { x==0 -> x:=1; x==0 -> x:=3 }")
    (s0,) = m.initial_states()
    assert [m.describe(t)["x"] for t in m.successors(s0)] == [2, 1, 3]


def test_out_of_bounds_disables():
    m = load_gcl("var x:0..2=2; proc P { 1 -> x:=x+1 }")
    (s0,) = m.initial_states()
    assert m.successors(s0) == []


def test_division_by_zero_disables():
    m = load_gcl("var x:0..3=0; var y:0..3=0; proc P { 1 / y == 0 -> x:=1; 1 -> x:=2 / y; 1 -> x:= 3 % y; 1 -> y:=1 }")
    (s0,) = m.initial_states()
    assert [m.describe(t) for t in m.successors(s0)] == [{"x": 0, "y": 1}]


def test_simultaneous_updates():
    m = load_gcl("var a:0..5=1; var b:0..5=2; proc P { a < b -> a:=b, b:=a }")
    (s0,) = m.initial_states()
    assert [m.describe(t) for t in m.successors(s0)] == [{"a": 2, "b": 1}]


def test_c_style_division():
    m = load_gcl("var x:-5..5=-5; var y:-5..5=0; proc P { y == 0 -> y := x / 2, x := x % 2 }")
    (s0,) = m.initial_states()
    assert [m.describe(t) for t in m.successors(s0)] == [{"x": -1, "y": -2}]


def test_encoding_layout():
    m = load_gcl("var a:0..255=7; var b:-1..300=-1; var c:5..5=5; proc P { a == 0 -> a := 1 }")
    assert m.state_width == 1 + 2 + 1
    (s0,) = m.initial_states()
    assert s0 == bytes([7, 0, 0, 0])
    assert m.decode(s0) == (7, -1, 5)


def test_compile_determinism(models_dir):
    import os

    for name in ("readers_writers.gcl", "mutex.gcl"):
        src = open(os.path.join(models_dir, name)).read()
        a, b = load_gcl(src), load_gcl(src)
        assert a.initial_states() == b.initial_states()
        for s in reachable_states(a):
            assert a.successors(s) == b.successors(s)


def test_shipped_readers_writers_matches_builtin(models_dir):
    import os

    for fname, err in (("readers_writers.gcl", 1), ("readers_writers_safe.gcl", 0)):
        g = load_gcl(open(os.path.join(models_dir, fname)).read())
        b = builtin_model("readers_writers", {"R": 2, "W": 2, "ERROR": err})
        assert len(reachable_states(g)) == len(reachable_states(b))


def test_evaluation_safety(models_dir):
    import os

    for fname in ("readers_writers.gcl", "mutex.gcl"):
        m = load_gcl(open(os.path.join(models_dir, fname)).read())
        bounds = {v.name: (v.lower, v.upper) for v in m.model.variables}
        for s in reachable_states(m):
            for k, v in m.describe(s).items():
                lo, hi = bounds[k]
                assert lo <= v <= hi


def test_precedence_and_printing():
    e = parse_expr("1 + 2 * 3 - (4 - 5) == -x || !y && z")
    assert isinstance(e, Binary) and e.op == "||"
    assert format_expr(e) == "1 + 2 * 3 - (4 - 5) == -x || !y && z"
    assert format_expr(parse_expr("a - (b - c)")) == "a - (b - c)"
    assert format_expr(parse_expr("(a - b) - c")) == "a - b - c"


def test_roundtrip_shipped_models(models_dir):
    import os

    for fname in sorted(os.listdir(models_dir)):
        if fname.endswith(".gcl"):
            ast = parse(open(os.path.join(models_dir, fname)).read())
            assert parse(format_model(ast)) == ast


NAMES = ["a", "b", "c"]
_ops = sorted(["||", "&&", "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "%"])
exprs = st.recursive(
    st.one_of(st.integers(0, 99).map(Num), st.sampled_from(NAMES).map(Var)),
    lambda sub: st.one_of(
        st.builds(Unary, st.sampled_from(["-", "!"]), sub),
        st.builds(Binary, st.sampled_from(_ops), sub, sub),
    ),
    max_leaves=12,
)


@given(exprs)
def test_expr_print_parse_roundtrip(e):
    assert parse_expr(format_expr(e)) == e


@given(st.lists(st.tuples(exprs, st.sampled_from(NAMES), exprs), min_size=1, max_size=4), exprs)
def test_model_print_parse_roundtrip(cmds, acc):
    body = "; ".join(f"{format_expr(g)} -> {v} := {format_expr(u)}" for g, v, u in cmds)
    src = "".join(f"var {n}: -3..3 = 0;\n" for n in NAMES) + f"proc P {{ {body} }}\naccept {format_expr(acc)}\n"
    ast = parse(src)
    assert parse(format_model(ast)) == ast
