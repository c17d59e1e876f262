"""Lazy evaluator for the classical fragment.

``next`` builds a value whose content is computed on demand; evaluating with a
budget ``n`` forces delayed content down to depth ``n`` and no further.  Isos
are applied by matching the argument against the left-hand sides, and run
backwards by swapping the two sides of every clause.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import NonClassicalIso, StuckMatch
from .syntax import (
    App,
    AppIso,
    BitLit,
    Clauses,
    Cons,
    DelayedApp,
    DelayedAppIso,
    Fix,
    Fold,
    FVar,
    InL,
    InR,
    IsoExpr,
    Lambda,
    LetPair,
    Next,
    NextIso,
    Nil,
    Pair,
    TermExpr,
    Unit,
    Var,
    pretty,
)

# ------------------------------------------------------------------ values


class Value:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class VUnit(Value):
    pass


@dataclass(frozen=True, slots=True)
class VInl(Value):
    body: Value


@dataclass(frozen=True, slots=True)
class VInr(Value):
    body: Value


@dataclass(frozen=True, slots=True)
class VPair(Value):
    left: Value
    right: Value


@dataclass(frozen=True, slots=True)
class VFold(Value):
    body: Value


class VNext(Value):
    """A delayed value; the content is computed at most once."""

    __slots__ = ("_thunk", "_value")

    def __init__(self, content: Value | Callable[[], Value]):
        if isinstance(content, Value):
            self._thunk, self._value = None, content
        else:
            self._thunk, self._value = content, None

    @property
    def forced(self) -> bool:
        return self._value is not None

    def value(self) -> Value:
        if self._value is None:
            self._value = self._thunk()
            self._thunk = None
        return self._value

    def __eq__(self, other) -> bool:
        return isinstance(other, VNext) and self.value() == other.value()

    def __hash__(self) -> int:
        return hash(("next", self.value()))

    def __repr__(self) -> str:
        return f"VNext({self._value!r})" if self.forced else "VNext(<thunk>)"


UNIT = VUnit()


def force(v: Value, depth: int) -> Value:
    """Force delayed content down to ``depth`` nested ``next``; returns ``v``."""
    match v:
        case VInl(b) | VInr(b) | VFold(b):
            force(b, depth)
        case VPair(a, b):
            force(a, depth)
            force(b, depth)
        case VNext():
            if depth > 0:
                force(v.value(), depth - 1)
    return v


def defined_at(v: Value, n: int) -> bool:
    """Whether ``v`` has no ``next`` nested deeper than ``n`` (forcing as needed)."""
    match v:
        case VUnit():
            return True
        case VInl(b) | VInr(b) | VFold(b):
            return defined_at(b, n)
        case VPair(a, b):
            return defined_at(a, n) and defined_at(b, n)
        case VNext():
            return n > 0 and defined_at(v.value(), n - 1)
    raise TypeError(f"not a value: {v!r}")


def next_depth(v: Value) -> int:
    """Deepest nesting of ``next``; forces everything."""
    match v:
        case VUnit():
            return 0
        case VInl(b) | VInr(b) | VFold(b):
            return next_depth(b)
        case VPair(a, b):
            return max(next_depth(a), next_depth(b))
        case VNext():
            return 1 + next_depth(v.value())
    raise TypeError(f"not a value: {v!r}")


def value_to_term(v: Value, sugar: bool = True) -> TermExpr:
    """Surface syntax of a value; unforced content prints as ``?``."""
    match v:
        case VUnit():
            return Unit()
        case VInl(VUnit()) if sugar:
            return BitLit(0)
        case VInr(VUnit()) if sugar:
            return BitLit(1)
        case VFold(VInl(VUnit())) if sugar:
            return Nil()
        case VFold(VInr(VPair(h, t))) if sugar:
            return Cons(value_to_term(h, sugar), value_to_term(t, sugar))
        case VInl(b):
            return InL(value_to_term(b, sugar))
        case VInr(b):
            return InR(value_to_term(b, sugar))
        case VPair(a, b):
            return Pair(value_to_term(a, sugar), value_to_term(b, sugar))
        case VFold(b):
            return Fold(value_to_term(b, sugar))
        case VNext():
            return Next(value_to_term(v.value(), sugar) if v.forced else Var("?"))
    raise TypeError(f"not a value: {v!r}")


def render_value(v: Value) -> str:
    return pretty(value_to_term(v))


def value_of_term(t: TermExpr) -> Value:
    """The value denoted by a closed constructor term (no iso applications)."""
    return Evaluator().eval_term(t, {}, {})


# --------------------------------------------------------- function values


class IsoClosure:
    __slots__ = ("clauses", "env", "inverted")

    def __init__(self, clauses: Clauses, env: dict, inverted: bool = False):
        self.clauses = clauses
        self.env = env
        self.inverted = inverted

    def sides(self):
        for lhs, rhs in self.clauses.clauses:
            yield (rhs, lhs) if self.inverted else (lhs, rhs)


class FunClosure:
    __slots__ = ("var", "body", "env")

    def __init__(self, var: str, body: IsoExpr, env: dict):
        self.var = var
        self.body = body
        self.env = env


class LaterIso:
    __slots__ = ("_thunk", "_value")

    def __init__(self, thunk: Callable[[], object]):
        self._thunk = thunk
        self._value = None

    def force(self):
        if self._value is None:
            self._value = self._thunk()
        return self._value


class Primitive:
    """An iso whose action needs superposition; it has no classical evaluation."""

    __slots__ = ("name", "inverted")

    def __init__(self, name: str, inverted: bool = False):
        self.name = name
        self.inverted = inverted


def invert(w):
    match w:
        case IsoClosure():
            return IsoClosure(w.clauses, w.env, not w.inverted)
        case LaterIso():
            return LaterIso(lambda: invert(w.force()))
        case Primitive():
            return Primitive(w.name, not w.inverted)
    raise TypeError(f"cannot invert {w!r}")


# --------------------------------------------------------------- evaluator


class Evaluator:
    """Evaluates terms of one program; iso declarations are shared closures."""

    def __init__(self, program=None):
        self.globals: dict[str, object] = {"had": Primitive("had"), "half": _HalfPrim()}
        self._decls: dict[str, IsoExpr] = {}
        if program is not None:
            isos = program.isos if hasattr(program, "isos") else {
                d.name: d.body for d in program.decls if hasattr(d, "body") and isinstance(d.body, IsoExpr)
            }
            self._decls.update(isos)
        self.terms = dict(getattr(program, "terms", {}) or {})

    def lookup(self, name: str, ienv: dict):
        if name in ienv:
            return ienv[name]
        if name in self.globals:
            return self.globals[name]
        if name in self._decls:
            self.globals[name] = self.eval_iso(self._decls[name], {})
            return self.globals[name]
        raise KeyError(f"unknown iso {name}")

    def eval_iso(self, w: IsoExpr, ienv: dict):
        match w:
            case FVar(n):
                return self.lookup(n, ienv)
            case Clauses():
                return IsoClosure(w, ienv)
            case Lambda(v, _, body):
                return FunClosure(v, body, ienv)
            case AppIso(f, a):
                return self.apply_fun(self.eval_iso(f, ienv), self.eval_iso(a, ienv))
            case NextIso(b):
                return LaterIso(lambda: self.eval_iso(b, ienv))
            case DelayedAppIso(f, a):
                fv, av = self.eval_iso(f, ienv), self.eval_iso(a, ienv)
                return LaterIso(lambda: self.apply_fun(fv.force(), av.force()))
            case Fix(v, _, body):
                # fix M unfolds to M (next (fix M))
                inner = dict(ienv)
                inner[v] = LaterIso(lambda: self.eval_iso(w, ienv))
                return self.eval_iso(body, inner)
        raise TypeError(f"not an iso: {w!r}")

    def apply_fun(self, f, arg):
        if isinstance(f, FunClosure):
            inner = dict(f.env)
            inner[f.var] = arg
            return self.eval_iso(f.body, inner)
        if isinstance(f, _HalfPrim):
            return Primitive("half")
        raise TypeError(f"cannot apply {f!r} to an iso")

    def apply_iso(self, w, v: Value) -> Value:
        if isinstance(w, Primitive):
            raise NonClassicalIso(f"{w.name} creates superpositions and has no classical evaluation")
        if not isinstance(w, IsoClosure):
            raise TypeError(f"{w!r} is not an iso")
        for lhs, rhs in w.sides():
            b = self.match_pattern(lhs, v, w.env)
            if b is not None:
                return self.eval_term(rhs, b, w.env)
        raise StuckMatch(f"no clause matches {render_value(force(v, 2))}")

    def eval_term(self, t: TermExpr, venv: dict, ienv: dict) -> Value:
        match t:
            case Unit():
                return UNIT
            case Var(x):
                return venv[x]
            case InL(b):
                return VInl(self.eval_term(b, venv, ienv))
            case InR(b):
                return VInr(self.eval_term(b, venv, ienv))
            case Pair(a, b):
                return VPair(self.eval_term(a, venv, ienv), self.eval_term(b, venv, ienv))
            case Fold(b):
                return VFold(self.eval_term(b, venv, ienv))
            case Next(b):
                return VNext(lambda: self.eval_term(b, venv, ienv))
            case App(w, a):
                return self.apply_iso(self.eval_iso(w, ienv), self.eval_term(a, venv, ienv))
            case DelayedApp(w, a):
                wv = self.eval_iso(w, ienv)
                av = self.eval_term(a, venv, ienv)
                return VNext(lambda: self.apply_iso(wv.force(), av.value()))
            case LetPair(x, y, bound, body):
                p = self.eval_term(bound, venv, ienv)
                if not isinstance(p, VPair):
                    raise TypeError(f"let expects a pair, got {p!r}")
                inner = dict(venv)
                inner[x], inner[y] = p.left, p.right
                return self.eval_term(body, inner, ienv)
            case Nil() | Cons() | BitLit():
                from .syntax import desugar_term

                return self.eval_term(desugar_term(t), venv, ienv)
        raise TypeError(f"not a term: {t!r}")

    def match_pattern(self, p: TermExpr, v: Value, ienv: dict | None = None) -> dict | None:
        """Bindings making ``p`` evaluate to ``v``, or ``None``."""
        ienv = ienv or {}
        match p:
            case Var(x):
                return {x: v}
            case Unit():
                return {} if isinstance(v, VUnit) else None
            case InL(b):
                return self.match_pattern(b, v.body, ienv) if isinstance(v, VInl) else None
            case InR(b):
                return self.match_pattern(b, v.body, ienv) if isinstance(v, VInr) else None
            case Fold(b):
                return self.match_pattern(b, v.body, ienv) if isinstance(v, VFold) else None
            case Pair(a, b):
                if not isinstance(v, VPair):
                    return None
                l = self.match_pattern(a, v.left, ienv)
                if l is None:
                    return None
                r = self.match_pattern(b, v.right, ienv)
                if r is None:
                    return None
                l.update(r)
                return l
            case Next(b):
                if not isinstance(v, VNext):
                    return None
                return self.match_pattern(b, v.value(), ienv)
            case App(w, b):
                try:
                    u = self.apply_iso(invert(self.eval_iso(w, ienv)), v)
                except StuckMatch:
                    return None
                return self.match_pattern(b, u, ienv)
            case DelayedApp(w, b):
                if not isinstance(v, VNext):
                    return None
                wv = self.eval_iso(w, ienv)
                u = VNext(lambda: self.apply_iso(invert(wv.force()), v.value()))
                return self.match_pattern(b, u, ienv)
            case LetPair(x, y, bound, body):
                inner = self.match_pattern(body, v, ienv)
                if inner is None:
                    return None
                pair = VPair(inner.pop(x), inner.pop(y))
                outer = self.match_pattern(bound, pair, ienv)
                if outer is None:
                    return None
                inner.update(outer)
                return inner
            case Nil() | Cons() | BitLit():
                from .syntax import desugar_term

                return self.match_pattern(desugar_term(p), v, ienv)
        raise TypeError(f"not a pattern: {p!r}")

    # --- entry points

    def eval(self, t: TermExpr, budget: int, venv: dict | None = None) -> Value:
        """Evaluate and force delayed content down to ``budget``."""
        if budget < 0:
            raise ValueError("budget must be non-negative")
        return force(self.eval_term(t, venv or {}, {}), budget)

    def run(self, name: str, budget: int) -> Value:
        return self.eval(self.terms[name], budget)

    def apply_named(self, iso: str, v: Value, budget: int, inverse: bool = False) -> Value:
        w = self.lookup(iso, {})
        if inverse:
            w = invert(w)
        return force(self.apply_iso(w, v), budget)


class _HalfPrim:
    """``half`` as a function value; its results are never classical."""

