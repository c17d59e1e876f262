import itertools

import pytest
from hypothesis import given, strategies as st

from gpm.category import (
    COHERENCE_KINDS, EPair, I, Inl, Inr, O, ProdO, STAR, SumO,
    coherence_bij, dim, elem_index, elem_of, enumerate_elems, normal_form,
    parse_elem, parse_shape, render_elem, render_shape, shape_json,
)
from gpm.errors import ShapeMismatch
from strategies import shapes

BIT = SumO(I, I)


def count_elems(s):
    # independent oracle: dimension by the rig laws
    match s:
        case SumO(a, b):
            return count_elems(a) + count_elems(b)
        case ProdO(a, b):
            return count_elems(a) * count_elems(b)
    return 0 if s == O else 1


@given(shapes)
def test_dim_matches_counting(s):
    assert dim(s) == count_elems(s) == len(enumerate_elems(s))


@given(shapes)
def test_elements_are_distinct_and_indexed(s):
    els = enumerate_elems(s)
    assert len(set(els)) == len(els)
    assert [elem_index(s)[e] for e in els] == list(range(len(els)))
    assert all(elem_of(e, s) for e in els)


@given(shapes)
def test_render_parse_roundtrip(s):
    assert parse_shape(render_shape(s)) == s
    assert parse_shape(shape_json(s)) == s
    for e in enumerate_elems(s):
        assert parse_elem(render_elem(e)) == e


@given(shapes)
def test_normal_form_preserves_dimension_and_is_idempotent(s):
    nf = normal_form(s)
    assert dim(nf) == dim(s)
    assert normal_form(nf) == nf


def test_normal_form_examples():
    assert normal_form(ProdO(BIT, BIT)) == SumO(SumO(SumO(I, I), I), I)
    assert normal_form(ProdO(O, BIT)) == O
    assert normal_form(ProdO(BIT, SumO(I, O)), atoms=[BIT]) == BIT


def test_element_order_is_left_major():
    assert enumerate_elems(ProdO(BIT, BIT)) == (
        EPair(Inl(STAR), Inl(STAR)), EPair(Inl(STAR), Inr(STAR)),
        EPair(Inr(STAR), Inl(STAR)), EPair(Inr(STAR), Inr(STAR)),
    )


@pytest.mark.parametrize("kind", COHERENCE_KINDS)
@given(data=st.data())
def test_coherences_are_bijections(kind, data):
    from gpm.category import _ARITY

    args = [data.draw(shapes) for _ in range(_ARITY[kind])]
    bij = coherence_bij(kind, *args)
    assert set(bij.fwd) == set(enumerate_elems(bij.src))
    assert sorted(map(render_elem, bij.fwd.values())) == sorted(map(render_elem, enumerate_elems(bij.dst)))
    assert bij.then(bij.inverse()).fwd == {e: e for e in enumerate_elems(bij.src)}
    # with two or more components the source-object form gives the same map
    if len(args) > 1:
        assert coherence_bij(kind, bij.src).fwd == bij.fwd


def test_coherence_rejects_bad_source():
    with pytest.raises(ShapeMismatch):
        coherence_bij("assocSum", ProdO(I, I))
    with pytest.raises(ShapeMismatch):
        coherence_bij("nope", I)


def test_assoc_pentagon_on_elements():
    a, b, c, d = BIT, I, BIT, SumO(I, BIT)
    lhs = coherence_bij("assocSum", SumO(a, b), c, d).then(coherence_bij("assocSum", a, b, SumO(c, d)))
    # the other path: (a+b)+c first, then middle, then right
    p1 = coherence_bij("assocSum", a, b, c)
    first = {}
    for e in enumerate_elems(SumO(SumO(SumO(a, b), c), d)):
        first[e] = Inl(p1(e.inner)) if isinstance(e, Inl) else e
    mid = coherence_bij("assocSum", a, SumO(b, c), d)
    tail = coherence_bij("assocSum", b, c, d)
    rhs = {}
    for e, v in first.items():
        w = mid(v)
        rhs[e] = Inr(tail(w.inner)) if isinstance(w, Inr) else w
    assert lhs.fwd == rhs


def test_parse_errors():
    for bad in ["", "I +", "(I", "X"]:
        with pytest.raises(ShapeMismatch):
            parse_shape(bad)
    with pytest.raises(ValueError):
        parse_elem("inl(")


def test_all_pairs_of_small_shapes_enumerate():
    for a, b in itertools.product([O, I, BIT], repeat=2):
        assert dim(SumO(a, b)) == dim(a) + dim(b)
