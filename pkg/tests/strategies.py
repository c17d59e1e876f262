"""Hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from gpm.category import I, O, ProdO, SumO, dim, enumerate_elems
from gpm.pinj import PInjMor

MAX_DIM = 12


def _shapes():
    leaves = st.sampled_from([O, I, SumO(I, I)])
    return st.recursive(
        leaves,
        lambda kids: st.one_of(st.builds(SumO, kids, kids), st.builds(ProdO, kids, kids)),
        max_leaves=6,
    )


shapes = _shapes().filter(lambda s: dim(s) <= MAX_DIM)


@st.composite
def partial_injections(draw, src=None, dst=None):
    src = draw(shapes) if src is None else src
    dst = draw(shapes) if dst is None else dst
    a, b = list(enumerate_elems(src)), list(enumerate_elems(dst))
    k = draw(st.integers(0, min(len(a), len(b))))
    dom = draw(st.permutations(a))[:k]
    cod = draw(st.permutations(b))[:k]
    return PInjMor(src, dst, dict(zip(dom, cod)))


@st.composite
def composable_triples(draw):
    x, y, z, w = (draw(shapes) for _ in range(4))
    return (
        draw(partial_injections(x, y)),
        draw(partial_injections(y, z)),
        draw(partial_injections(z, w)),
    )
