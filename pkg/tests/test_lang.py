"""Parser, printer round trips, validation, views, and desugaring."""

import random

import pytest

from conftest import CORPUS, load, rand_program, small_scope_module
from hyperflow.errors import HprogSyntaxError, UnknownAgent
from hyperflow.lang import ast as A
from hyperflow.lang import (
    desugar,
    parse,
    parse_program,
    pretty_print,
    project_view,
    validate,
)
from hyperflow.lang.transform import has_construct
from hyperflow.probcore import vnum


def test_infix_choice_sugar():
    p = parse_program("h <- 0 [1/3] 1")
    assert isinstance(p, A.Choose)
    (e0, p0), (e1, p1) = p.dist.entries
    assert e0 == A.Lit(vnum(0)) and e1 == A.Lit(vnum(1))
    assert isinstance(p1, A.Binop) and p1.op == "-"  # 1 - 1/3


def test_uniform_chain_sugar():
    p = parse_program("h <- 0 [] 1 [] 2")
    assert p == A.Choose("h", A.DistUniform((A.Lit(vnum(0)), A.Lit(vnum(1)), A.Lit(vnum(2)))))


def test_parse_skip():
    assert parse_program("skip") == A.Skip()


def test_threebox_parses_to_three_statements():
    m = load("threebox_S")
    assert isinstance(m.body, A.Seq)
    assert isinstance(m.body.second, A.Seq)
    assert isinstance(m.body.first, A.Choose)
    assert isinstance(m.body.second.second, A.Assign)


def test_general_choice_between_statements():
    p = parse_program("skip [h] skip")
    assert p == A.GeneralChoice(A.Skip(), A.Name("h"), A.Skip())


def test_syntax_error_carries_position():
    with pytest.raises(HprogSyntaxError) as exc:
        parse("vis v : {0..1};\nskip skip")
    assert exc.value.line == 2


def test_pretty_print_skip():
    assert pretty_print(parse("skip")).strip() == "skip"


def test_pretty_print_general_choice():
    out = pretty_print(parse("skip [h] skip"))
    assert "skip [h]" in out and parse(out) == parse("skip [h] skip")


@pytest.mark.parametrize("name", sorted(f.stem for f in CORPUS.glob("*.hprog")))
def test_corpus_round_trip(name):
    m = load(name)
    assert parse(pretty_print(m)) == m


def test_random_program_round_trip():
    rng = random.Random(7)
    for _ in range(150):
        module = small_scope_module(rand_program(rng, depth=3))
        assert parse(pretty_print(module)) == module


def test_validate_clean_corpus():
    for f in CORPUS.glob("*.hprog"):
        m = parse(f.read_text())
        assert [d for d in validate(m) if d.severity == "error"] == []


def test_validate_undeclared_variable():
    m = parse("vis v : {0..1}; v := z")
    codes = [d.code for d in validate(m)]
    assert "UndeclaredVariable" in codes


def test_validate_weights_not_one_summing():
    m = parse("hid h : {0..1}; h <- {0 @ 1/2, 1 @ 1/3}")
    codes = [d.code for d in validate(m)]
    assert "WeightsNotOneSumming" in codes


def test_validate_local_needs_init():
    src = "vis v : {0..1}; local hid t : {0..1} in { v := t }"
    m = parse(src)
    assert any(d.code == "MissingLocalInit" for d in validate(m))
    relaxed = validate(m, allow_uniform_init=True)
    assert all(d.severity == "warning" for d in relaxed)


def test_validate_local_in_atomic_rejected():
    src = "vis v : {0..1}; atomic { local hid t : {0..1} := {0 @ 1} in { skip } }"
    assert any(d.code == "LocalInAtomic" for d in validate(parse(src)))


def test_validate_reveal_in_atomic_rejected():
    src = "vis v : {0..1}; atomic { reveal v }"
    assert any(d.code == "RevealInAtomic" for d in validate(parse(src)))


def test_validate_division_by_constant_zero():
    m = parse("vis v : {0..1}; v := v div 0")
    assert any(d.code == "DivisionByZero" for d in validate(m))


# -- views -------------------------------------------------------------------


def test_three_judges_view_A():
    m = project_view(load("three_judges_spec"), "A")
    vis = {d.name: d.visibility for d in m.decls}
    assert vis["a"] == A.VIS
    assert vis["b"] == A.HID and vis["c"] == A.HID


def test_two_party_view_B():
    m = project_view(load("two_party_conj"), "B")
    assert {d.name: d.visibility for d in m.decls} == {"b": A.VIS, "c": A.HID}
    block = m.body
    assert isinstance(block, A.LocalBlock)
    local_vis = {ld.decl.name: ld.decl.visibility for ld in block.decls}
    assert local_vis == {"b0": A.VIS, "b1": A.VIS, "c0": A.HID}


def test_view_of_global_only_program_unchanged():
    m = load("threebox_S")
    # no agent annotations anywhere: external view is the identity
    assert project_view(m, None) == m


def test_view_unknown_agent():
    with pytest.raises(UnknownAgent):
        project_view(load("three_judges_spec"), "Z")


def test_view_idempotent_and_structure_preserving():
    for agent in ("A", "B", "C", None):
        m = load("three_judges_fig2")
        once = project_view(m, agent)
        assert project_view(once, agent) == once
        assert A.node_count(once.body) == A.node_count(m.body)


def test_view_any_agent_on_global_only_module_is_identity():
    m = load("threebox_S")
    assert project_view(m, "A") == m


# -- desugaring ----------------------------------------------------------------


def test_desugar_reveal_becomes_local_assign():
    m = desugar(load("three_judges_spec"))
    block = m.body
    assert isinstance(block, A.LocalBlock)
    (ld,) = block.decls
    assert ld.decl.visibility == A.VIS
    assert isinstance(block.body, A.Assign)
    assert block.body.target == ld.decl.name
    # revealed expression is boolean: domain is {false, true}
    assert [v.kind for v in ld.decl.domain.values] == ["bool", "bool"]


def test_desugar_without_reveal_is_identity():
    m = load("threebox_S")
    assert desugar(m) == m


def test_desugar_xor_assign():
    from hyperflow.probcore import vbool

    m = parse(
        "vis p : {false,true}; hid k : {false,true}; hid e : {false,true};"
        "(p xor k) := e"
    )
    d = desugar(m)
    assert isinstance(d.body, A.Seq)
    assert d.body.first == A.Choose(
        "p", A.DistUniform((A.Lit(vbool(False)), A.Lit(vbool(True))))
    )
    assert d.body.second == A.Assign("k", A.Binop("xor", A.Name("p"), A.Name("e")))


def test_desugar_removes_all_sugar_and_validates():
    rng = random.Random(11)
    for name in ("two_party_conj", "three_judges_fig2", "three_judges_fig3"):
        m = desugar(project_view(load(name), "B"))
        assert not has_construct(m.body, (A.Reveal, A.XorAssign))
        assert [d for d in validate(m) if d.severity == "error"] == []


def test_desugar_fresh_names_avoid_collisions():
    src = "vis reveal_1 : {0..1}; hid h : {0..1}; reveal h = 1"
    d = desugar(parse(src))
    assert isinstance(d.body, A.LocalBlock)
    assert d.body.decls[0].decl.name != "reveal_1"
