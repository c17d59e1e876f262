"""Finite sets and partial injections.

A morphism is a finite association from source elements to target elements
that is functional and injective.  All laws hold exactly.
"""

from __future__ import annotations

from typing import Mapping

from .category import (
    Backend,
    Elem,
    EPair,
    Inl,
    Inr,
    ObjShape,
    ProdO,
    STAR,
    SumO,
    OneO,
    elem_index,
    elem_of,
    enumerate_elems,
    render_elem,
    render_shape,
    shape_json,
)
from .errors import IncompatibleError, ShapeMismatch


class PInjMor:
    __slots__ = ("src", "dst", "fwd")

    def __init__(self, src: ObjShape, dst: ObjShape, fwd: Mapping[Elem, Elem], check: bool = True):
        self.src = src
        self.dst = dst
        self.fwd = dict(fwd)
        if check:
            self._validate()

    def _validate(self) -> None:
        seen: dict[Elem, Elem] = {}
        for a, b in self.fwd.items():
            if not elem_of(a, self.src):
                raise ShapeMismatch(f"{render_elem(a)} is not an element of {render_shape(self.src)}")
            if not elem_of(b, self.dst):
                raise ShapeMismatch(f"{render_elem(b)} is not an element of {render_shape(self.dst)}")
            if b in seen:
                raise IncompatibleError(
                    f"not injective: {render_elem(seen[b])} and {render_elem(a)} both map to {render_elem(b)}",
                    witness=b,
                )
            seen[b] = a

    @property
    def pairs(self) -> list[tuple[Elem, Elem]]:
        idx = elem_index(self.src)
        return sorted(self.fwd.items(), key=lambda kv: idx[kv[0]])

    def __call__(self, e: Elem) -> Elem | None:
        return self.fwd.get(e)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PInjMor)
            and self.src == other.src
            and self.dst == other.dst
            and self.fwd == other.fwd
        )

    def __hash__(self) -> int:
        return hash((self.src, self.dst, frozenset(self.fwd.items())))

    def __repr__(self) -> str:
        body = ", ".join(f"{render_elem(a)}↦{render_elem(b)}" for a, b in self.pairs)
        return f"PInjMor({render_shape(self.src)} → {render_shape(self.dst)}: {{{body}}})"


def _same(a: ObjShape, b: ObjShape, what: str) -> None:
    if a != b:
        raise ShapeMismatch(f"{what}: {render_shape(a)} vs {render_shape(b)}")


class PInjBackend(Backend):
    name = "pinj"

    def src(self, f: PInjMor) -> ObjShape:
        return f.src

    def dst(self, f: PInjMor) -> ObjShape:
        return f.dst

    def identity(self, s: ObjShape) -> PInjMor:
        return PInjMor(s, s, {e: e for e in enumerate_elems(s)}, check=False)

    def compose(self, g: PInjMor, f: PInjMor) -> PInjMor:
        _same(f.dst, g.src, "compose")
        gf = g.fwd
        return PInjMor(f.src, g.dst, {a: gf[b] for a, b in f.fwd.items() if b in gf}, check=False)

    def dagger(self, f: PInjMor) -> PInjMor:
        return PInjMor(f.dst, f.src, {b: a for a, b in f.fwd.items()}, check=False)

    def tensor_prod(self, f: PInjMor, g: PInjMor) -> PInjMor:
        out = {
            EPair(a, c): EPair(b, d)
            for a, b in f.fwd.items()
            for c, d in g.fwd.items()
        }
        return PInjMor(ProdO(f.src, g.src), ProdO(f.dst, g.dst), out, check=False)

    def tensor_sum(self, f: PInjMor, g: PInjMor) -> PInjMor:
        out = {Inl(a): Inl(b) for a, b in f.fwd.items()}
        out.update({Inr(a): Inr(b) for a, b in g.fwd.items()})
        return PInjMor(SumO(f.src, g.src), SumO(f.dst, g.dst), out, check=False)

    def zero_mor(self, src: ObjShape, dst: ObjShape) -> PInjMor:
        return PInjMor(src, dst, {}, check=False)

    def lift(self, src: ObjShape, dst: ObjShape, mapping: Mapping[Elem, Elem]) -> PInjMor:
        return PInjMor(src, dst, mapping, check=False)

    def point(self, s: ObjShape, e: Elem) -> PInjMor:
        return PInjMor(OneO(), s, {STAR: e})

    def is_zero(self, f: PInjMor) -> bool:
        return not f.fwd

    def conflict(self, f: PInjMor, g: PInjMor) -> Elem | None:
        """An element witnessing that ``f`` and ``g`` cannot be joined."""
        _same(f.src, g.src, "join source")
        _same(f.dst, g.dst, "join target")
        back = {b: a for a, b in f.fwd.items()}
        for a, b in g.fwd.items():
            if a in f.fwd and f.fwd[a] != b:
                return a
            if b in back and back[b] != a:
                return b
        return None

    def compatible(self, f: PInjMor, g: PInjMor) -> bool:
        return self.conflict(f, g) is None

    def join(self, f: PInjMor, g: PInjMor) -> PInjMor:
        bad = self.conflict(f, g)
        if bad is not None:
            raise IncompatibleError(f"join conflicts at element {render_elem(bad)}", witness=bad)
        out = dict(f.fwd)
        out.update(g.fwd)
        return PInjMor(f.src, f.dst, out, check=False)

    def eq(self, f: PInjMor, g: PInjMor) -> bool:
        return f == g

    # the defining equations reduce to totality and surjectivity
    def is_dagger_mono(self, f: PInjMor) -> bool:
        return len(f.fwd) == len(enumerate_elems(f.src))

    def is_dagger_epi(self, f: PInjMor) -> bool:
        return len(f.fwd) == len(enumerate_elems(f.dst))

    def to_json(self, f: PInjMor) -> dict:
        return {
            "backend": "pinj",
            "src": shape_json(f.src),
            "dst": shape_json(f.dst),
            "pairs": [[render_elem(a), render_elem(b)] for a, b in f.pairs],
        }
