import pytest
from hypothesis import given, strategies as st

from gpm.category import COHERENCE_KINDS, I, Inl, Inr, STAR, SumO, enumerate_elems
from gpm.errors import IncompatibleError, ShapeMismatch
from gpm.pinj import PInjBackend, PInjMor
from strategies import composable_triples, partial_injections, shapes

B = PInjBackend()
BIT = SumO(I, I)


@given(composable_triples())
def test_composition_is_associative(fgh):
    f, g, h = fgh
    assert B.compose(h, B.compose(g, f)) == B.compose(B.compose(h, g), f)


@given(partial_injections())
def test_identities_and_dagger(f):
    assert B.compose(f, B.identity(f.src)) == f
    assert B.compose(B.identity(f.dst), f) == f
    assert B.dagger(B.dagger(f)) == f
    # inverse-category law: f f† f = f
    assert B.compose(f, B.compose(B.dagger(f), f)) == f


@given(composable_triples())
def test_dagger_is_contravariant(fgh):
    f, g, _ = fgh
    assert B.dagger(B.compose(g, f)) == B.compose(B.dagger(f), B.dagger(g))


@given(st.data())
def test_tensors_are_functorial(data):
    f1, g1, _ = data.draw(composable_triples())
    f2, g2, _ = data.draw(composable_triples())
    for t in (B.tensor_sum, B.tensor_prod):
        assert t(B.compose(g1, f1), B.compose(g2, f2)) == B.compose(t(g1, g2), t(f1, f2))


@given(st.data())
def test_join_is_union_when_compatible(data):
    x, y = data.draw(shapes), data.draw(shapes)
    f = data.draw(partial_injections(x, y))
    g = data.draw(partial_injections(x, y))
    if B.compatible(f, g):
        j = B.join(f, g)
        assert set(j.pairs) == set(f.pairs) | set(g.pairs)
        assert B.join(g, f) == j
    else:
        with pytest.raises(IncompatibleError) as e:
            B.join(f, g)
        assert e.value.witness is not None


@given(partial_injections())
def test_join_is_idempotent_and_zero_is_unit(f):
    assert B.join(f, f) == f
    assert B.join(f, B.zero_mor(f.src, f.dst)) == f


@pytest.mark.parametrize("kind", [k for k in COHERENCE_KINDS])
def test_coherences_are_dagger_isos(kind):
    from gpm.category import _ARITY

    c = B.coherence(kind, *([BIT] * _ARITY[kind]))
    assert B.is_dagger_iso(c)


def test_predicates_on_examples():
    inj = B.inj1(I, I)
    assert B.is_dagger_mono(inj) and not B.is_dagger_epi(inj)
    assert B.is_dagger_epi(B.dagger(inj))
    assert all(B.predicates(B.identity(BIT)).values())
    assert not all(B.predicates(inj).values())


def test_conflict_witness():
    f = PInjMor(BIT, BIT, {Inl(STAR): Inl(STAR)})
    g = PInjMor(BIT, BIT, {Inl(STAR): Inr(STAR)})
    assert B.conflict(f, g) == Inl(STAR)
    h = PInjMor(BIT, BIT, {Inr(STAR): Inl(STAR)})
    assert B.conflict(f, h) == Inl(STAR)


def test_construction_is_validated():
    with pytest.raises(IncompatibleError):
        PInjMor(BIT, I, {Inl(STAR): STAR, Inr(STAR): STAR})
    with pytest.raises(ShapeMismatch):
        PInjMor(I, I, {Inl(STAR): STAR})
    with pytest.raises(ShapeMismatch):
        B.compose(B.identity(BIT), B.identity(I))


def test_json_lists_pairs_in_order():
    j = B.to_json(B.coherence("symmSum", I, I))
    assert j == {"backend": "pinj", "src": "I + I", "dst": "I + I", "pairs": [["inl(*)", "inr(*)"], ["inr(*)", "inl(*)"]]}
    assert len(enumerate_elems(BIT)) == 2
