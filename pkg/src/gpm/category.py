"""Object shapes, their canonical elements, rig coherences and the backend contract.

Both backends share one basis: an object is a finite tree built from ``O``,
``I``, ``+`` and ``*``, and its elements are enumerated in a fixed order.
Partial injections map elements to elements; matrices index rows and columns
by the same enumeration.  Structural morphisms (coherences, injections,
context routing) are defined once on elements and lifted by each backend.
"""

from __future__ import annotations

import re

from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Mapping

from .errors import ShapeMismatch


# ---------------------------------------------------------------- shapes


class ObjShape:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class ZeroO(ObjShape):
    pass


@dataclass(frozen=True, slots=True)
class OneO(ObjShape):
    pass


@dataclass(frozen=True, slots=True)
class SumO(ObjShape):
    left: ObjShape
    right: ObjShape


@dataclass(frozen=True, slots=True)
class ProdO(ObjShape):
    left: ObjShape
    right: ObjShape


O = ZeroO()
I = OneO()


# -------------------------------------------------------------- elements


class Elem:
    __slots__ = ()

    def __str__(self) -> str:
        return render_elem(self)


@dataclass(frozen=True, slots=True)
class Star(Elem):
    pass


@dataclass(frozen=True, slots=True)
class Inl(Elem):
    inner: Elem


@dataclass(frozen=True, slots=True)
class Inr(Elem):
    inner: Elem


@dataclass(frozen=True, slots=True)
class EPair(Elem):
    left: Elem
    right: Elem


STAR = Star()


def render_elem(e: Elem) -> str:
    match e:
        case Star():
            return "*"
        case Inl(x):
            return f"inl({render_elem(x)})"
        case Inr(x):
            return f"inr({render_elem(x)})"
        case EPair(a, b):
            return f"({render_elem(a)},{render_elem(b)})"
    raise TypeError(f"not an element: {e!r}")


def parse_elem(text: str) -> Elem:
    """Inverse of :func:`render_elem`."""
    pos = 0

    def go() -> Elem:
        nonlocal pos
        if text.startswith("*", pos):
            pos += 1
            return STAR
        for tag, ctor in (("inl(", Inl), ("inr(", Inr)):
            if text.startswith(tag, pos):
                pos += len(tag)
                inner = go()
                expect(")")
                return ctor(inner)
        if text.startswith("(", pos):
            pos += 1
            a = go()
            expect(",")
            b = go()
            expect(")")
            return EPair(a, b)
        raise ValueError(f"bad element text at {pos}: {text!r}")

    def expect(ch: str) -> None:
        nonlocal pos
        if not text.startswith(ch, pos):
            raise ValueError(f"expected {ch!r} at {pos} in {text!r}")
        pos += 1

    e = go()
    if pos != len(text):
        raise ValueError(f"trailing input in {text!r}")
    return e


# ----------------------------------------------------------- enumeration


@lru_cache(maxsize=None)
def enumerate_elems(s: ObjShape) -> tuple[Elem, ...]:
    match s:
        case ZeroO():
            return ()
        case OneO():
            return (STAR,)
        case SumO(a, b):
            return tuple(Inl(x) for x in enumerate_elems(a)) + tuple(
                Inr(y) for y in enumerate_elems(b)
            )
        case ProdO(a, b):
            right = enumerate_elems(b)
            return tuple(EPair(x, y) for x in enumerate_elems(a) for y in right)
    raise ShapeMismatch(f"not a shape: {s!r}")


@lru_cache(maxsize=None)
def dim(s: ObjShape) -> int:
    match s:
        case ZeroO():
            return 0
        case OneO():
            return 1
        case SumO(a, b):
            return dim(a) + dim(b)
        case ProdO(a, b):
            return dim(a) * dim(b)
    raise ShapeMismatch(f"not a shape: {s!r}")


@lru_cache(maxsize=None)
def elem_index(s: ObjShape) -> dict[Elem, int]:
    return {e: i for i, e in enumerate(enumerate_elems(s))}


def elem_of(e: Elem, s: ObjShape) -> bool:
    match (e, s):
        case (Star(), OneO()):
            return True
        case (Inl(x), SumO(a, _)):
            return elem_of(x, a)
        case (Inr(y), SumO(_, b)):
            return elem_of(y, b)
        case (EPair(x, y), ProdO(a, b)):
            return elem_of(x, a) and elem_of(y, b)
    return False


# ------------------------------------------------------------- rendering


def render_shape(s: ObjShape, unicode: bool = True) -> str:
    """Human rendering with minimal parentheses, e.g. ``(I ⊕ I) ⊕ I``."""
    plus, times = (" ⊕ ", " ⊗ ") if unicode else (" + ", " * ")

    def wrap(t: ObjShape) -> str:
        text = go(t)
        return f"({text})" if isinstance(t, (SumO, ProdO)) else text

    def go(t: ObjShape) -> str:
        match t:
            case ZeroO():
                return "O"
            case OneO():
                return "I"
            case SumO(a, b):
                return wrap(a) + plus + wrap(b)
            case ProdO(a, b):
                return wrap(a) + times + wrap(b)
        raise ShapeMismatch(f"not a shape: {t!r}")

    return go(s)


def shape_json(s: ObjShape) -> str:
    return render_shape(s, unicode=False)


_SHAPE_TOKEN = re.compile(r"\s*([OI()+*⊕⊗])")


def parse_shape(text: str) -> ObjShape:
    """Parse either rendering of a shape (ASCII or with ``⊕``/``⊗``)."""
    toks: list[str] = []
    at = 0
    while at < len(text):
        if text[at:].strip() == "":
            break
        m = _SHAPE_TOKEN.match(text, at)
        if not m:
            raise ShapeMismatch(f"bad shape text at offset {at} in {text!r}")
        toks.append({"⊕": "+", "⊗": "*"}.get(m.group(1), m.group(1)))
        at = m.end()
    pos = 0

    def peek() -> str | None:
        return toks[pos] if pos < len(toks) else None

    def atom() -> ObjShape:
        nonlocal pos
        tok = peek()
        pos += 1
        if tok == "O":
            return O
        if tok == "I":
            return I
        if tok == "(":
            inner = binary()
            if peek() != ")":
                raise ShapeMismatch(f"unbalanced shape text {text!r}")
            pos += 1
            return inner
        raise ShapeMismatch(f"expected O, I or '(' in {text!r}, found {tok!r}")

    def binary() -> ObjShape:
        nonlocal pos
        left = atom()
        if peek() in ("+", "*"):
            op = toks[pos]
            pos += 1
            right = atom()
            return SumO(left, right) if op == "+" else ProdO(left, right)
        return left

    s = binary()
    if pos != len(toks):
        raise ShapeMismatch(f"trailing shape text in {text!r}")
    return s


def normal_form(s: ObjShape, atoms: Iterable[ObjShape] = ()) -> ObjShape:
    """Rig normal form: a left-nested sum of left-nested products of atoms.

    Distributivity, annihilation, the unitors and associativity are applied
    until the shape is a sum of monomials.  Subtrees listed in ``atoms`` are
    kept opaque, so a list object can be read as a polynomial in its element
    type.  ``O`` is the empty sum and ``I`` the empty product.
    """
    atoms = tuple(atoms)

    def poly(t: ObjShape) -> list[tuple[ObjShape, ...]]:
        if t in atoms:
            return [(t,)]
        match t:
            case ZeroO():
                return []
            case OneO():
                return [()]
            case SumO(a, b):
                return poly(a) + poly(b)
            case ProdO(a, b):
                right = poly(b)
                return [m + n for m in poly(a) for n in right]
        raise ShapeMismatch(f"not a shape: {t!r}")

    def monomial(m: tuple[ObjShape, ...]) -> ObjShape:
        if not m:
            return I
        out = m[0]
        for factor in m[1:]:
            out = ProdO(out, factor)
        return out

    terms = [monomial(m) for m in poly(s)]
    if not terms:
        return O
    out = terms[0]
    for t in terms[1:]:
        out = SumO(out, t)
    return out


# ------------------------------------------------------------ bijections


@dataclass(frozen=True)
class Bijection:
    """An element-level bijection between two shapes (partial on neither)."""

    src: ObjShape
    dst: ObjShape
    fwd: Mapping[Elem, Elem]

    def __call__(self, e: Elem) -> Elem:
        return self.fwd[e]

    def inverse(self) -> "Bijection":
        return Bijection(self.dst, self.src, {v: k for k, v in self.fwd.items()})

    def then(self, other: "Bijection") -> "Bijection":
        if self.dst != other.src:
            raise ShapeMismatch("bijections do not compose")
        return Bijection(self.src, other.dst, {k: other.fwd[v] for k, v in self.fwd.items()})


def bijection_from(src: ObjShape, dst: ObjShape, fn: Callable[[Elem], Elem]) -> Bijection:
    return Bijection(src, dst, {e: fn(e) for e in enumerate_elems(src)})


_ARITY = {
    "assocSum": 3, "assocProd": 3, "distribL": 3, "distribR": 3,
    "symmSum": 2, "symmProd": 2,
    "unitlSum": 1, "unitrSum": 1, "unitlProd": 1, "unitrProd": 1,
    "annihL": 1, "annihR": 1,
}

COHERENCE_KINDS = tuple(_ARITY)


def _split_source(kind: str, s: ObjShape) -> tuple[ObjShape, ...]:
    """Recover the component shapes of a coherence from its source object."""
    match kind, s:
        case "assocSum", SumO(SumO(x, y), z):
            return (x, y, z)
        case "assocProd", ProdO(ProdO(x, y), z):
            return (x, y, z)
        case "distribL", ProdO(SumO(x, y), z):
            return (x, y, z)
        case "distribR", ProdO(x, SumO(y, z)):
            return (x, y, z)
        case "symmSum", SumO(x, y):
            return (x, y)
        case "symmProd", ProdO(x, y):
            return (x, y)
        case "unitlSum", SumO(ZeroO(), x):
            return (x,)
        case "unitrSum", SumO(x, ZeroO()):
            return (x,)
        case "unitlProd", ProdO(OneO(), x):
            return (x,)
        case "unitrProd", ProdO(x, OneO()):
            return (x,)
        case "annihL", ProdO(ZeroO(), x):
            return (x,)
        case "annihR", ProdO(x, ZeroO()):
            return (x,)
    raise ShapeMismatch(f"{kind} does not apply to {render_shape(s)}")


def coherence_bij(kind: str, *shapes: ObjShape) -> Bijection:
    """The structural isomorphism ``kind`` of the rig, on elements.

    ``shapes`` are either the component objects (``symmProd(X, Y)``) or the
    single source object of the coherence (``symmProd(X ⊗ Y)``).
    """
    if kind not in _ARITY:
        raise ShapeMismatch(f"unknown coherence kind {kind!r}")
    if not all(isinstance(s, ObjShape) for s in shapes):
        raise ShapeMismatch(f"{kind}: arguments must be shapes")
    want = _ARITY[kind]
    if len(shapes) != want:
        if len(shapes) == 1:
            shapes = _split_source(kind, shapes[0])
        else:
            raise ShapeMismatch(f"{kind} takes {want} shapes, got {len(shapes)}")

    match kind:
        case "assocSum":
            x, y, z = shapes

            def f(e):
                match e:
                    case Inl(Inl(a)):
                        return Inl(a)
                    case Inl(Inr(b)):
                        return Inr(Inl(b))
                    case Inr(c):
                        return Inr(Inr(c))

            return bijection_from(SumO(SumO(x, y), z), SumO(x, SumO(y, z)), f)
        case "assocProd":
            x, y, z = shapes
            return bijection_from(
                ProdO(ProdO(x, y), z),
                ProdO(x, ProdO(y, z)),
                lambda e: EPair(e.left.left, EPair(e.left.right, e.right)),
            )
        case "distribL":
            x, y, z = shapes

            def f(e):
                match e:
                    case EPair(Inl(a), c):
                        return Inl(EPair(a, c))
                    case EPair(Inr(b), c):
                        return Inr(EPair(b, c))

            return bijection_from(ProdO(SumO(x, y), z), SumO(ProdO(x, z), ProdO(y, z)), f)
        case "distribR":
            x, y, z = shapes

            def f(e):
                match e:
                    case EPair(a, Inl(b)):
                        return Inl(EPair(a, b))
                    case EPair(a, Inr(c)):
                        return Inr(EPair(a, c))

            return bijection_from(ProdO(x, SumO(y, z)), SumO(ProdO(x, y), ProdO(x, z)), f)
        case "symmSum":
            x, y = shapes
            return bijection_from(
                SumO(x, y), SumO(y, x),
                lambda e: Inr(e.inner) if isinstance(e, Inl) else Inl(e.inner),
            )
        case "symmProd":
            x, y = shapes
            return bijection_from(ProdO(x, y), ProdO(y, x), lambda e: EPair(e.right, e.left))
        case "unitlSum":
            (x,) = shapes
            return bijection_from(SumO(O, x), x, lambda e: e.inner)
        case "unitrSum":
            (x,) = shapes
            return bijection_from(SumO(x, O), x, lambda e: e.inner)
        case "unitlProd":
            (x,) = shapes
            return bijection_from(ProdO(I, x), x, lambda e: e.right)
        case "unitrProd":
            (x,) = shapes
            return bijection_from(ProdO(x, I), x, lambda e: e.left)
        case "annihL":
            (x,) = shapes
            return Bijection(ProdO(O, x), O, {})
        case "annihR":
            (x,) = shapes
            return Bijection(ProdO(x, O), O, {})
    raise AssertionError(kind)


# ------------------------------------------------------- backend contract


class Backend(ABC):
    """Operations a concrete dagger rig category provides.

    Morphisms are opaque values; every operation goes through the backend so
    that equality can carry a tolerance where the model needs one.
    """

    name: str

    def object_of(self, s: ObjShape) -> ObjShape:
        return s

    @abstractmethod
    def src(self, f) -> ObjShape: ...

    @abstractmethod
    def dst(self, f) -> ObjShape: ...

    @abstractmethod
    def identity(self, s: ObjShape): ...

    @abstractmethod
    def compose(self, g, f): ...

    @abstractmethod
    def dagger(self, f): ...

    @abstractmethod
    def tensor_prod(self, f, g): ...

    @abstractmethod
    def tensor_sum(self, f, g): ...

    @abstractmethod
    def zero_mor(self, src: ObjShape, dst: ObjShape): ...

    @abstractmethod
    def lift(self, src: ObjShape, dst: ObjShape, mapping: Mapping[Elem, Elem]):
        """Embed a partial injection on elements as a morphism."""

    @abstractmethod
    def join(self, f, g): ...

    @abstractmethod
    def compatible(self, f, g) -> bool: ...

    @abstractmethod
    def eq(self, f, g) -> bool: ...

    @abstractmethod
    def to_json(self, f) -> dict: ...

    @abstractmethod
    def point(self, s: ObjShape, e: Elem):
        """The morphism ``I -> s`` picking out element ``e``."""

    @abstractmethod
    def is_zero(self, f) -> bool: ...

    def bang(self, s: ObjShape):
        return self.zero_mor(s, O)

    def cobang(self, s: ObjShape):
        return self.zero_mor(O, s)

    def inj1(self, a: ObjShape, b: ObjShape):
        return self.lift(a, SumO(a, b), {e: Inl(e) for e in enumerate_elems(a)})

    def inj2(self, a: ObjShape, b: ObjShape):
        return self.lift(b, SumO(a, b), {e: Inr(e) for e in enumerate_elems(b)})

    def coherence(self, kind: str, *shapes: ObjShape):
        bij = coherence_bij(kind, *shapes)
        return self.lift(bij.src, bij.dst, bij.fwd)

    def lift_bijection(self, bij: Bijection):
        return self.lift(bij.src, bij.dst, bij.fwd)

    def compose_all(self, *fs):
        """``compose_all(h, g, f) = h ∘ g ∘ f``."""
        out = fs[-1]
        for g in reversed(fs[:-1]):
            out = self.compose(g, out)
        return out

    def is_dagger_mono(self, f) -> bool:
        return self.eq(self.compose(self.dagger(f), f), self.identity(self.src(f)))

    def is_dagger_epi(self, f) -> bool:
        return self.eq(self.compose(f, self.dagger(f)), self.identity(self.dst(f)))

    def is_dagger_iso(self, f) -> bool:
        return self.is_dagger_mono(f) and self.is_dagger_epi(f)

    def predicates(self, f) -> dict[str, bool]:
        return {
            "dagger_mono": self.is_dagger_mono(f),
            "dagger_epi": self.is_dagger_epi(f),
            "dagger_iso": self.is_dagger_iso(f),
        }

    def join_all(self, src: ObjShape, dst: ObjShape, fs: Iterable):
        out = self.zero_mor(src, dst)
        for f in fs:
            out = self.join(out, f)
        return out
