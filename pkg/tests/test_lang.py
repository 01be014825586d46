import pytest

from luset.diagnostics import ElaborationError
from luset.lang import (BASE_CLOCK, Binop, Call, ClockOn, Const, Def, Fby, Ite,
                        Merge, NCall, NDef, NFby, Ty, Unop, Var, VarDecl, When,
                        causality, defined_vars, elaborate, equations_free_vars,
                        free_vars, well_formed)
from luset.parser import parse_program

from conftest import CTR_SPDMTR_SRC


def decl(name, ty=Ty.INT, ck=BASE_CLOCK):
    return VarDecl(name, ty, ck)


# ---------------------------------------------------------------------------
# free/defined variables, rule by rule
# ---------------------------------------------------------------------------

def test_fv_const_is_empty():
    assert free_vars(Const(5)) == set()


def test_fv_var():
    assert free_vars(Var("x")) == {"x"}


def test_fv_unop_binop():
    assert free_vars(Unop("-", Var("x"))) == {"x"}
    assert free_vars(Binop("+", Var("x"), Var("y"))) == {"x", "y"}


def test_fv_when_includes_sampler():
    assert free_vars(When((Var("y"),), "x", True)) == {"y", "x"}


def test_fv_merge_ite():
    assert free_vars(Merge("x", (Var("a"),), (Var("b"),))) == {"x", "a", "b"}
    assert free_vars(Ite(Var("c"), (Var("a"),), (Var("b"),))) == {"c", "a", "b"}


def test_fv_fby_and_call():
    assert free_vars(Fby((Var("a"),), (Var("b"),))) == {"a", "b"}
    assert free_vars(Call("f", (Var("a"), Const(1)))) == {"a"}


def test_fv_clsocks_include_base():
    assert free_vars(BASE_CLOCK) == {"base"}
    assert free_vars(ClockOn(BASE_CLOCK, "x", True)) == {"base", "x"}


def test_fv_equation_subtracts_defined():
    # pre_n = 0 fby n
    eq = Def(("pre_n",), None, (Fby((Const(0),), (Var("n"),)),))
    assert free_vars(eq) == {"n"}
    assert defined_vars(eq) == {"pre_n"}


def test_fv_normalised_equations_include_clock():
    eq = NFby("pre_n", BASE_CLOCK, Const(0), Var("n"))
    assert free_vars(eq) == {"n", "base"}
    eq2 = NDef("x", ClockOn(BASE_CLOCK, "c", True), Var("y"))
    assert free_vars(eq2) == {"base", "c", "y"}
    eq3 = NCall(("a", "b"), BASE_CLOCK, "f", (Var("e"),))
    assert free_vars(eq3) == {"base", "e"}
    assert defined_vars(eq3) == {"a", "b"}


def test_defined_vars_examples():
    assert defined_vars(Def(("spd",), None, (Call("Ctr", ()),))) == {"spd"}
    assert defined_vars(Def(("a", "b"), None, (Call("f", (Var("e"),)),))) == {"a", "b"}


def test_equations_free_vars_of_node_body(ctr_prog):
    node = ctr_prog.node("Ctr")
    assert equations_free_vars(node.equations) == {"init", "incr", "rst"}
    dv = set()
    for eq in node.equations:
        dv |= defined_vars(eq)
    assert dv == {"n", "fst", "pre_n"}


# ---------------------------------------------------------------------------
# well-formedness diagnostics
# ---------------------------------------------------------------------------

def test_well_formed_accepts_paper_programs():
    assert well_formed(parse_program(CTR_SPDMTR_SRC)) == []


def test_duplicate_definition_reported():
    prog = parse_program("""
node f(x: int) returns (n: int);
let
  n = x;
  n = x + 1;
tel
""")
    kinds = [d.kind for d in well_formed(prog)]
    assert "duplicate-definition" in kinds


def test_recursive_calls_reported():
    prog = parse_program("""
node f(x: int) returns (y: int); let y = g(x); tel
node g(x: int) returns (y: int); let y = f(x); tel
""")
    kinds = [d.kind for d in well_formed(prog)]
    assert "recursive-call" in kinds


def test_missing_definition_and_free_variable():
    prog = parse_program("""
node f(x: int) returns (y: int);
var z: int;
let
  y = w + 1;
tel
""")
    kinds = {d.kind for d in well_formed(prog)}
    assert {"missing-definition", "free-variable"} <= kinds


def test_input_defined_reported():
    prog = parse_program("node f(x: int) returns (y: int); let x = 1; y = 2; tel")
    kinds = {d.kind for d in well_formed(prog)}
    assert "input-defined" in kinds


def test_unknown_node_reported():
    prog = parse_program("node f(x: int) returns (y: int); let y = nope(x); tel")
    assert "unknown-node" in {d.kind for d in well_formed(prog)}


# ---------------------------------------------------------------------------
# clock elaboration
# ---------------------------------------------------------------------------

def test_all_base_program_gets_base_clocks(ctr_prog):
    for eq in ctr_prog.node("Ctr").equations:
        assert eq.clock == BASE_CLOCK


def test_sampled_call_equation_gets_derived_clock(re_trig_prog):
    node = re_trig_prog.node("re_trig")
    (veq,) = [eq for eq in node.equations if "v" in eq.targets]
    # v = merge ck ... sits on base; its true branch call runs on base on ck
    assert veq.clock == BASE_CLOCK


def test_binop_across_clocks_rejected():
    src = """
node f(x: int, c: bool) returns (y: int);
let
  y = x + (x when c);
tel
"""
    with pytest.raises(ElaborationError) as err:
        elaborate(parse_program(src))
    assert any(d.kind == "clock-mismatch" for d in err.value.diagnostics)


def test_merge_requires_complementary_branches():
    src = """
node f(x: int, c: bool) returns (y: int);
let
  y = merge c (x when c) x;
tel
"""
    with pytest.raises(ElaborationError):
        elaborate(parse_program(src))


def test_arity_mismatch_detected():
    src = """
node two(x: int) returns (a, b: int);
let
  a = x; b = x;
tel
node f(x: int) returns (y: int);
let
  y = two(x);
tel
"""
    with pytest.raises(ElaborationError) as err:
        elaborate(parse_program(src))
    assert any(d.kind == "arity-mismatch" for d in err.value.diagnostics)


def test_type_mismatch_detected():
    with pytest.raises(ElaborationError):
        elaborate(parse_program("node f(x: int) returns (y: bool); let y = x + 1; tel"))


def test_declared_local_clock_used(re_trig_prog):
    # clock annotations land on declarations after parsing `when`
    src = """
node f(c: bool, x: int) returns (y: int);
var s: int when c;
let
  s = x when c;
  y = merge c s (0 when not c);
tel
"""
    prog = elaborate(parse_program(src))
    node = prog.node("f")
    assert node.decl("s").clock == ClockOn(BASE_CLOCK, "c", True)
    (seq,) = [eq for eq in node.equations if eq.targets == ("s",)]
    assert seq.clock == ClockOn(BASE_CLOCK, "c", True)


# ---------------------------------------------------------------------------
# causality
# ---------------------------------------------------------------------------

def test_fby_breaks_cycle(ctr_prog):
    res = causality(ctr_prog.node("Ctr"))
    assert res.ok
    order = [ctr_prog.node("Ctr").equations[i].targets[0] for i in res.order]
    # fst and pre_n are readable before n; n reads both instantaneously
    assert order.index("n") > order.index("fst")
    assert order.index("n") > order.index("pre_n")


def test_self_cycle_detected():
    prog = parse_program("node f(x: int) returns (y: int); let y = y + 1; tel")
    res = causality(prog.node("f"))
    assert not res.ok
    assert res.cycle == ("y",)


def test_two_variable_cycle_detected():
    prog = parse_program("""
node f(x: int) returns (a: int);
var b: int;
let
  a = b;
  b = a;
tel
""")
    res = causality(prog.node("f"))
    assert not res.ok
    assert set(res.cycle) == {"a", "b"}


def test_order_reads_only_earlier_or_delayed(ctr_prog):
    node = ctr_prog.node("Ctr")
    res = causality(node)
    seen = set()
    from luset.lang import eq_instantaneous_deps, eq_targets
    inputs = {d.name for d in node.inputs}
    for i in res.order:
        eq = node.equations[i]
        deps = eq_instantaneous_deps(eq) - inputs - {"base"}
        assert deps <= seen
        seen |= set(eq_targets(eq))
