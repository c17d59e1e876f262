import pytest
from hypothesis import given, strategies as st

from gpm.errors import NonClassicalIso, StuckMatch
from gpm.evaluator import (
    Evaluator, VNext, VPair, defined_at, force, next_depth, render_value, value_of_term,
)
from gpm.props import bit, list_value, nat_value
from gpm.syntax import desugar, desugar_term, parse_program, parse_term
from gpm.typecheck import check_program

bit_lists = st.lists(st.integers(0, 1), max_size=6)


def as_list(bits):
    return list_value(bit(b) for b in bits)


def to_bits(v):
    out = []
    while type(v.body).__name__ == "VInr":
        pair = v.body.body
        out.append(1 if type(pair.left).__name__ == "VInr" else 0)
        v = pair.right.value()
    return out


def checked(src):
    cp = check_program(desugar(parse_program(src)))
    assert cp.ok, cp.diagnostics
    return cp


def test_terms_evaluate(demo):
    ev = Evaluator(demo("flip"))
    assert render_value(ev.run("flipped", 3)) == "'1 :: next []"
    assert render_value(ev.run("three", 3)) == "'1 :: next ('0 :: next ('0 :: next []))"
    ev = Evaluator(demo("map"))
    assert render_value(ev.run("ys", 4)) == "'1 :: next ('0 :: next [])"


@given(bit_lists)
def test_flip_changes_only_the_head(demo, bits):
    ev = Evaluator(demo("flip"))
    out = to_bits(ev.apply_named("flip", as_list(bits), len(bits)))
    assert out == ([1 - bits[0]] + bits[1:] if bits else [])


@given(bit_lists)
def test_map_not_negates_every_element(demo, bits):
    ev = Evaluator(demo("map"))
    out = ev.apply_named("mapnot", as_list(bits), len(bits))
    assert to_bits(out) == [1 - b for b in bits]


@given(bit_lists)
def test_inverse_undoes_application(demo, bits):
    for name, iso in (("flip", "flip"), ("map", "mapnot")):
        ev = Evaluator(demo(name))
        v = as_list(bits)
        there = ev.apply_named(iso, v, len(bits))
        back = ev.apply_named(iso, there, len(bits), inverse=True)
        assert to_bits(back) == bits


@given(st.integers(0, 5), st.integers(0, 1))
def test_tagging_naturals_is_invertible(demo, k, b):
    ev = Evaluator(demo("nats"))
    arg = VPair(bit(b), nat_value(k))
    out = ev.apply_named("tag", arg, k)
    assert type(out).__name__ == ("VInr" if b else "VInl")
    assert ev.apply_named("tag", out, k, inverse=True) == arg


def test_quantum_isos_are_not_classical(demo):
    ev = Evaluator(demo("qctrl"))
    assert render_value(ev.run("flipped", 0)) == "('1, '1)"
    with pytest.raises(NonClassicalIso):
        ev.apply_named("chad", VPair(bit(1), bit(0)), 0)


def test_missing_clause_is_stuck():
    cp = checked("iso f : 1 + 1 <-> 1 + 1 = { inl () <-> inr () };")
    ev = Evaluator(cp)
    assert ev.apply_named("f", bit(0), 0) == bit(1)
    with pytest.raises(StuckMatch):
        ev.apply_named("f", bit(1), 0)


def test_delayed_content_is_lazy(demo):
    ev = Evaluator(demo("map"))
    v = ev.apply_named("mapnot", as_list([0, 1]), 0)
    assert render_value(v) == "'1 :: next ?"
    assert not defined_at(as_list([0]), 0)
    force(v, 5)
    assert render_value(v) == "'1 :: next ('0 :: next [])"
    assert next_depth(v) == 2


def test_thunks_run_once():
    calls = []

    def thunk():
        calls.append(1)
        return value_of_term(parse_term("()"))

    d = VNext(thunk)
    assert not d.forced
    d.value()
    d.value()
    assert calls == [1] and d.forced


@given(bit_lists)
def test_rendered_values_parse_back(bits):
    v = force(as_list(bits), len(bits))
    assert value_of_term(desugar_term(parse_term(render_value(v)))) == v


def test_rendering_uses_sugar():
    assert render_value(value_of_term(parse_term("inl (inr ())"))) == "inl '1"
    assert render_value(value_of_term(desugar_term(parse_term("fold (inl ())")))) == "[]"


def test_negative_budget_rejected(demo):
    with pytest.raises(ValueError):
        Evaluator(demo("flip")).run("one", -1)


def test_larger_budgets_only_extend(demo):
    ev = Evaluator(demo("flip"))
    shown = [render_value(ev.run("three", b)) for b in range(4)]
    assert shown[1] == "'1 :: next ('0 :: next ?)"
    assert "?" not in shown[3]
    for shallow, deep in zip(shown, shown[1:]):
        assert deep.startswith(shallow.rstrip(")").removesuffix("?"))


def test_pattern_matching():
    ev = Evaluator()
    assert ev.match_pattern(parse_term("inl x"), value_of_term(parse_term("inr ()"))) is None
    env = ev.match_pattern(desugar_term(parse_term("h :: next t")), as_list([1]))
    assert env["h"] == bit(1) and render_value(env["t"]) == "[]"
