"""Static checks: type formation, latency-indexed linear term typing, iso typing,
clause orthogonality, exhaustivity and the same-depth relation.

Every check is syntax directed.  A variable bound under ``k`` nested ``next``
patterns has latency ``k`` and must be used under exactly ``k`` nested
``next`` on the other side of its clause.  The argument of ``@@`` already has
a delayed type, so ``@@`` itself does not shift latency.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable

from .errors import GpmError
from .syntax import (
    App,
    AppIso,
    Arrow,
    ClauseAnn,
    Clauses,
    DelayedApp,
    DelayedAppIso,
    Fix,
    Fold,
    FunTypeExpr,
    FVar,
    InL,
    InR,
    IsoDecl,
    IsoExpr,
    IsoT,
    Lambda,
    Later,
    LaterT,
    LetPair,
    Mu,
    Named,
    Next,
    NextIso,
    One,
    Pair,
    Prod,
    Program,
    Sum,
    TermDecl,
    TermExpr,
    TVar,
    TypeDecl,
    TypeExpr,
    Unit,
    Var,
    Zero,
    contains_next,
    pretty,
)

ERROR_CODES = (
    "UnboundTypeVar",
    "UnguardedMu",
    "UnboundVar",
    "VarUsedTwice",
    "VarUnused",
    "LatencyMismatch",
    "TypeMismatch",
    "NotAnIsoType",
    "ClauseContextMismatch",
    "DepthMismatch",
    "OverlappingPatterns",
)

QUBIT = Sum(One(), One())
PRIMITIVE_TYPES: dict[str, FunTypeExpr] = {
    "had": IsoT(QUBIT, QUBIT),
    "half": Arrow(IsoT(QUBIT, QUBIT), IsoT(QUBIT, QUBIT)),
}


class TypeCheckError(GpmError):
    def __init__(self, code: str, message: str, span=None):
        assert code in ERROR_CODES, code
        self.code = code
        self.message = message
        self.span = span
        where = f"{span[0]}:{span[1]}: " if span else ""
        super().__init__(f"{where}{code}: {message}")

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "span": list(self.span) if self.span else None,
        }


class _CannotInfer(TypeCheckError):
    def __init__(self, message: str, span=None):
        super().__init__("TypeMismatch", message, span)


def _span(node):
    return getattr(node, "pos", None)


# ------------------------------------------------------------ type algebra


def free_type_vars(t: TypeExpr) -> set[str]:
    match t:
        case Zero() | One() | Named():
            return set()
        case TVar(n):
            return {n}
        case Sum(a, b) | Prod(a, b):
            return free_type_vars(a) | free_type_vars(b)
        case Later(b):
            return free_type_vars(b)
        case Mu(v, b):
            return free_type_vars(b) - {v}
    raise TypeError(f"not a type: {t!r}")


def guarded_in(x: str, t: TypeExpr) -> bool:
    """True iff every free occurrence of ``x`` in ``t`` sits below a ``@``."""
    match t:
        case TVar(n):
            return n != x
        case Zero() | One() | Named() | Later():
            return True
        case Sum(a, b) | Prod(a, b):
            return guarded_in(x, a) and guarded_in(x, b)
        case Mu(v, b):
            return v == x or guarded_in(x, b)
    raise TypeError(f"not a type: {t!r}")


def _unguarded_occurrence(x: str, t: TypeExpr):
    match t:
        case TVar(n) if n == x:
            return t
        case Sum(a, b) | Prod(a, b):
            return _unguarded_occurrence(x, a) or _unguarded_occurrence(x, b)
        case Mu(v, b) if v != x:
            return _unguarded_occurrence(x, b)
    return None


def wf_type(theta: Iterable[str], t: TypeExpr) -> None:
    """Raise unless ``t`` is well formed in the type context ``theta``."""
    theta = frozenset(theta)
    match t:
        case Zero() | One():
            return
        case Named(n):
            raise TypeCheckError("UnboundTypeVar", f"type name {n} is not resolved", _span(t))
        case TVar(n):
            if n not in theta:
                raise TypeCheckError("UnboundTypeVar", f"type variable {n} is not bound", _span(t))
        case Sum(a, b) | Prod(a, b):
            wf_type(theta, a)
            wf_type(theta, b)
        case Later(b):
            wf_type(theta, b)
        case Mu(v, b):
            wf_type(theta | {v}, b)
            if not guarded_in(v, b):
                occ = _unguarded_occurrence(v, b)
                raise TypeCheckError(
                    "UnguardedMu",
                    f"{v} occurs unguarded in mu {v} . {pretty(b)}",
                    _span(occ) or _span(t),
                )
        case _:
            raise TypeError(f"not a type: {t!r}")


def _fresh(base: str, avoid: set[str]) -> str:
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def subst_type(t: TypeExpr, x: str, s: TypeExpr) -> TypeExpr:
    """Capture-avoiding ``t[s/x]``."""
    match t:
        case TVar(n):
            return s if n == x else t
        case Zero() | One() | Named():
            return t
        case Sum(a, b):
            return Sum(subst_type(a, x, s), subst_type(b, x, s))
        case Prod(a, b):
            return Prod(subst_type(a, x, s), subst_type(b, x, s))
        case Later(b):
            return Later(subst_type(b, x, s))
        case Mu(v, b):
            if v == x:
                return t
            fv = free_type_vars(s)
            if v in fv:
                nv = _fresh(v, fv | free_type_vars(b) | {x})
                b = subst_type(b, v, TVar(nv))
                v = nv
            return Mu(v, subst_type(b, x, s))
    raise TypeError(f"not a type: {t!r}")


def unfold(t: Mu) -> TypeExpr:
    return subst_type(t.body, t.var, t)


@lru_cache(maxsize=4096)
def _nameless(t: TypeExpr, env: tuple[str, ...] = ()):
    match t:
        case Zero():
            return "0"
        case One():
            return "1"
        case TVar(n):
            return ("bv", env.index(n)) if n in env else ("fv", n)
        case Named(n):
            return ("named", n)
        case Sum(a, b):
            return ("+", _nameless(a, env), _nameless(b, env))
        case Prod(a, b):
            return ("*", _nameless(a, env), _nameless(b, env))
        case Later(b):
            return ("@", _nameless(b, env))
        case Mu(v, b):
            return ("mu", _nameless(b, (v,) + env))
    raise TypeError(f"not a type: {t!r}")


def type_eq(a: TypeExpr, b: TypeExpr) -> bool:
    """Equality up to renaming of bound variables."""
    return a == b or _nameless(a) == _nameless(b)


def funty_eq(a: FunTypeExpr, b: FunTypeExpr) -> bool:
    match a, b:
        case IsoT(x, y), IsoT(u, v):
            return type_eq(x, u) and type_eq(y, v)
        case LaterT(x), LaterT(u):
            return funty_eq(x, u)
        case Arrow(x, y), Arrow(u, v):
            return funty_eq(x, u) and funty_eq(y, v)
    return False


def resolve_type(t: TypeExpr, aliases: dict[str, TypeExpr]) -> TypeExpr:
    match t:
        case Named(n):
            if n not in aliases:
                raise TypeCheckError("UnboundTypeVar", f"unknown type name {n}", _span(t))
            return aliases[n]
        case Zero() | One() | TVar():
            return t
        case Sum(a, b) | Prod(a, b):
            return replace(t, left=resolve_type(a, aliases), right=resolve_type(b, aliases))
        case Later(b) | Mu(body=b):
            return replace(t, body=resolve_type(b, aliases))
    raise TypeError(f"not a type: {t!r}")


def resolve_funty(t: FunTypeExpr, aliases: dict[str, TypeExpr]) -> FunTypeExpr:
    match t:
        case IsoT(a, b):
            return replace(t, dom=resolve_type(a, aliases), cod=resolve_type(b, aliases))
        case LaterT(b):
            return replace(t, body=resolve_funty(b, aliases))
        case Arrow(a, b):
            return replace(t, arg=resolve_funty(a, aliases), res=resolve_funty(b, aliases))
    raise TypeError(f"not a function type: {t!r}")


def wf_funty(t: FunTypeExpr) -> None:
    match t:
        case IsoT(a, b):
            wf_type((), a)
            wf_type((), b)
        case LaterT(b):
            wf_funty(b)
        case Arrow(a, b):
            wf_funty(a)
            wf_funty(b)


# ------------------------------------------------------- same-depth relation


@dataclass(frozen=True)
class DepthDerivation:
    rule: str  # base | context | next | next-inj | next-pair | sym
    left: TermExpr
    right: TermExpr
    premises: tuple["DepthDerivation", ...] = ()

    def leaves(self) -> list["DepthDerivation"]:
        if not self.premises:
            return [self]
        return [leaf for p in self.premises for leaf in p.leaves()]


def _contexts(t: TermExpr):
    """All ways to write ``t`` as ``C[s]`` with ``C`` a next-free context.

    Yields ``(s, trivial)`` where ``trivial`` marks the empty context.
    """
    yield t, True
    stack = [t]
    while stack:
        u = stack.pop()
        children = []
        match u:
            case InL(b) | InR(b) | Fold(b):
                children = [b]
            case App(_, a):
                children = [a]
            case Pair(a, b):
                if not contains_next(b):
                    children.append(a)
                if not contains_next(a):
                    children.append(b)
            case LetPair(bound=a, body=b):
                if not contains_next(b):
                    children.append(a)
                if not contains_next(a):
                    children.append(b)
        for c in children:
            yield c, False
            stack.append(c)


def _size(t: TermExpr) -> int:
    match t:
        case InL(b) | InR(b) | Fold(b) | Next(b):
            return 1 + _size(b)
        case Pair(a, b) | LetPair(bound=a, body=b):
            return 1 + _size(a) + _size(b)
        case App(_, a) | DelayedApp(_, a):
            return 1 + _size(a)
    return 1


def same_depth(t: TermExpr, u: TermExpr) -> DepthDerivation | None:
    """A derivation of ``t ⋈ u`` under the five rules, or ``None``.

    The search is exhaustive: each rule is tried, the context rule over every
    decomposition of both sides, and symmetry by swapping the goal.  Every
    premise is strictly smaller than its conclusion, so the search ends.
    """
    memo: dict[tuple[TermExpr, TermExpr], DepthDerivation | None] = {}

    def sym(a, b):
        key = (a, b)
        if key in memo:
            return memo[key]
        memo[key] = None
        d = directed(a, b)
        if d is None:
            d2 = directed(b, a)
            if d2 is not None:
                d = DepthDerivation("sym", a, b, (d2,))
        memo[key] = d
        return d

    def directed(a, b):
        if not contains_next(a) and not contains_next(b):
            return DepthDerivation("base", a, b)
        match a, b:
            case Next(x), Next(y):
                p = sym(x, y)
                if p:
                    return DepthDerivation("next", a, b, (p,))
        match a, b:
            case Next(InL(x)), InL(Next(y)):
                p = sym(x, y)
                if p:
                    return DepthDerivation("next-inj", a, b, (p,))
            case Next(InR(x)), InR(Next(y)):
                p = sym(x, y)
                if p:
                    return DepthDerivation("next-inj", a, b, (p,))
            case Next(Pair(x1, x2)), Pair(Next(y1), Next(y2)):
                p1 = sym(x1, y1)
                p2 = sym(x2, y2) if p1 else None
                if p1 and p2:
                    return DepthDerivation("next-pair", a, b, (p1, p2))
        budget = _size(a) + _size(b)
        for s, s_triv in _contexts(a):
            if contains_next(a) and not _all_nexts_in(a, s):
                continue
            for v, v_triv in _contexts(b):
                if s_triv and v_triv:
                    continue
                if contains_next(b) and not _all_nexts_in(b, v):
                    continue
                if _size(s) + _size(v) >= budget:
                    continue
                p = sym(s, v)
                if p:
                    return DepthDerivation("context", a, b, (p,))
        return None

    return sym(t, u)


def _count_next(t: TermExpr) -> int:
    match t:
        case Next(b):
            return 1 + _count_next(b)
        case InL(b) | InR(b) | Fold(b):
            return _count_next(b)
        case Pair(a, b) | LetPair(bound=a, body=b):
            return _count_next(a) + _count_next(b)
        case App(_, a) | DelayedApp(_, a):
            return _count_next(a)
    return 0


def _all_nexts_in(t: TermExpr, sub: TermExpr) -> bool:
    return _count_next(sub) == _count_next(t)


# ------------------------------------------------ orthogonality and coverage


def _strip(t: TermExpr) -> TermExpr:
    while True:
        match t:
            case Fold(b) | Next(b):
                t = b
            case LetPair(body=b):
                t = b
            case _:
                return t


def orthogonal(t: TermExpr, u: TermExpr) -> bool:
    """Some common constructor path has ``inl`` on one side and ``inr`` on the other.

    ``fold``, ``next`` and the body of ``let`` are looked through; variables and
    applications discriminate nothing.
    """
    a, b = _strip(t), _strip(u)
    match a, b:
        case (InL(_), InR(_)) | (InR(_), InL(_)):
            return True
        case (InL(x), InL(y)) | (InR(x), InR(y)):
            return orthogonal(x, y)
        case Pair(x1, x2), Pair(y1, y2):
            return orthogonal(x1, y1) or orthogonal(x2, y2)
    return False


_WILD = object()


def exhaustive(patterns: list[TermExpr], ty: TypeExpr) -> bool:
    """Whether the patterns cover every value of the closed type ``ty``.

    A pattern-matrix check; an application counts as covering nothing, which
    only ever makes the answer more conservative.
    """
    return _covers([[p] for p in patterns], [ty])


def _covers(rows: list[list], types: list[TypeExpr]) -> bool:
    if not types:
        return bool(rows)
    ty, rest = types[0], types[1:]
    norm = []
    for r in rows:
        p = r[0]
        while isinstance(p, LetPair):
            p = p.body
        if isinstance(p, Var):
            p = _WILD
        if isinstance(p, (App, DelayedApp)):
            continue
        norm.append([p] + r[1:])
    rows = norm
    if all(r[0] is _WILD for r in rows):
        return _covers([r[1:] for r in rows], rest)
    match ty:
        case Zero():
            return True
        case One():
            return _covers([r[1:] for r in rows], rest)
        case Sum(lt, rt):
            left = [[r[0].body if isinstance(r[0], InL) else _WILD] + r[1:]
                    for r in rows if r[0] is _WILD or isinstance(r[0], InL)]
            right = [[r[0].body if isinstance(r[0], InR) else _WILD] + r[1:]
                     for r in rows if r[0] is _WILD or isinstance(r[0], InR)]
            return _covers(left, [lt] + rest) and _covers(right, [rt] + rest)
        case Prod(lt, rt):
            out = []
            for r in rows:
                if isinstance(r[0], Pair):
                    out.append([r[0].left, r[0].right] + r[1:])
                else:
                    out.append([_WILD, _WILD] + r[1:])
            return _covers(out, [lt, rt] + rest)
        case Mu():
            out = [[r[0].body if isinstance(r[0], Fold) else _WILD] + r[1:] for r in rows]
            return _covers(out, [unfold(ty)] + rest)
        case Later(b):
            out = [[r[0].body if isinstance(r[0], Next) else _WILD] + r[1:] for r in rows]
            return _covers(out, [b] + rest)
    return False


# ----------------------------------------------------------- term checking


@dataclass(frozen=True)
class Binding:
    ty: TypeExpr
    latency: int
    span: object = field(default=None, compare=False)


Ctx = dict[str, Binding]


def _merge(a: Ctx, b: Ctx) -> Ctx:
    for k, v in b.items():
        if k in a:
            raise TypeCheckError("VarUsedTwice", f"variable {k} is used more than once", v.span)
    out = dict(a)
    out.update(b)
    return out


def _mismatch(expected, got, node) -> TypeCheckError:
    return TypeCheckError(
        "TypeMismatch", f"expected {pretty(expected)}, found {pretty(got)}", _span(node)
    )


class Checker:
    """Typechecks terms and isos under an iso context Ψ (name -> function type)."""

    def __init__(self, psi: dict[str, FunTypeExpr] | None = None, aliases=None):
        self.psi: dict[str, FunTypeExpr] = dict(PRIMITIVE_TYPES)
        self.psi.update(psi or {})
        self.aliases: dict[str, TypeExpr] = dict(aliases or {})

    # --- terms: each side of a clause is checked on its own and yields the
    # context of its free variables together with their latencies

    def check_term(self, t: TermExpr, ty: TypeExpr, depth: int = 0, hints=None):
        """Check ``t`` against ``ty``; return (elaborated term, free-variable context)."""
        hints = hints or {}
        match t:
            case Unit():
                if not isinstance(ty, One):
                    raise _mismatch(ty, One(), t)
                return t, {}
            case InL(b) | InR(b):
                if not isinstance(ty, Sum):
                    raise TypeCheckError(
                        "TypeMismatch", f"injection checked against non-sum {pretty(ty)}", _span(t)
                    )
                part = ty.left if isinstance(t, InL) else ty.right
                b2, ctx = self.check_term(b, part, depth, hints)
                return replace(t, body=b2), ctx
            case Pair(a, b):
                if not isinstance(ty, Prod):
                    raise TypeCheckError(
                        "TypeMismatch", f"pair checked against non-product {pretty(ty)}", _span(t)
                    )
                a2, c1 = self.check_term(a, ty.left, depth, hints)
                b2, c2 = self.check_term(b, ty.right, depth, hints)
                return replace(t, left=a2, right=b2), _merge(c1, c2)
            case Fold(b):
                if not isinstance(ty, Mu):
                    raise TypeCheckError(
                        "TypeMismatch", f"fold checked against non-recursive {pretty(ty)}", _span(t)
                    )
                b2, ctx = self.check_term(b, unfold(ty), depth, hints)
                return replace(t, body=b2), ctx
            case Next(b):
                if not isinstance(ty, Later):
                    raise TypeCheckError(
                        "TypeMismatch", f"next checked against non-delayed {pretty(ty)}", _span(t)
                    )
                b2, ctx = self.check_term(b, ty.body, depth + 1, hints)
                return replace(t, body=b2), ctx
            case Var(n):
                return t, {n: Binding(ty, depth, _span(t))}
            case App(w, a):
                w2, wt = self._iso_for_app(w, ty, delayed=False)
                if not type_eq(wt.cod, ty):
                    raise _mismatch(ty, wt.cod, t)
                a2, ctx = self.check_term(a, wt.dom, depth, hints)
                return replace(t, iso=w2, arg=a2), ctx
            case DelayedApp(w, a):
                if not isinstance(ty, Later):
                    raise TypeCheckError(
                        "TypeMismatch", f"delayed application checked against {pretty(ty)}", _span(t)
                    )
                w2, wt = self._iso_for_app(w, ty.body, delayed=True)
                if not type_eq(wt.cod, ty.body):
                    raise _mismatch(ty.body, wt.cod, t)
                a2, ctx = self.check_term(a, Later(wt.dom), depth, hints)
                return replace(t, iso=w2, arg=a2), ctx
            case LetPair():
                return self._check_let(t, ty, depth, hints)
        got, ctx_t = None, None
        try:
            t2, got, ctx_t = self.synth_term(t, depth, hints)
        except _CannotInfer:
            raise TypeCheckError("TypeMismatch", f"cannot check {pretty(t)}", _span(t))
        if not type_eq(got, ty):
            raise _mismatch(ty, got, t)
        return t2, ctx_t

    def _check_let(self, t: LetPair, ty, depth, hints):
        try:
            b2, pty, c1 = self.synth_term(t.bound, depth, hints)
            if not isinstance(pty, Prod):
                raise TypeCheckError("TypeMismatch", f"let binds a pair but {pretty(pty)} is not one", _span(t))
            inner = dict(hints)
            inner.update({t.x: pty.left, t.y: pty.right})
            body2, c2 = self.check_term(t.body, ty, depth, inner)
        except _CannotInfer:
            body2, c2 = self.check_term(t.body, ty, depth, hints)
            for v in (t.x, t.y):
                if v not in c2:
                    raise TypeCheckError("VarUnused", f"let-bound {v} is never used", _span(t))
            pty = Prod(c2[t.x].ty, c2[t.y].ty)
            b2, c1 = self.check_term(t.bound, pty, depth, hints)
        c2 = self._pop_let(t, c2, pty, depth)
        return replace(t, bound=b2, body=body2, ann=pty), _merge(c1, c2)

    def _pop_let(self, t: LetPair, ctx: Ctx, pty: Prod, depth: int) -> Ctx:
        ctx = dict(ctx)
        for v, vty in ((t.x, pty.left), (t.y, pty.right)):
            if v not in ctx:
                raise TypeCheckError("VarUnused", f"let-bound {v} is never used", _span(t))
            b = ctx.pop(v)
            if not type_eq(b.ty, vty):
                raise _mismatch(vty, b.ty, t)
            if b.latency != depth:
                raise TypeCheckError(
                    "LatencyMismatch",
                    f"let-bound {v} has latency {depth} but is used under {b.latency} next",
                    b.span,
                )
        return ctx

    def synth_term(self, t: TermExpr, depth: int = 0, hints=None):
        """Infer the type of ``t``; return (elaborated term, type, context)."""
        hints = hints or {}
        match t:
            case Unit():
                return t, One(), {}
            case Var(n):
                if n not in hints:
                    raise _CannotInfer(f"cannot infer the type of variable {n}", _span(t))
                return t, hints[n], {n: Binding(hints[n], depth, _span(t))}
            case Pair(a, b):
                a2, ta, c1 = self.synth_term(a, depth, hints)
                b2, tb, c2 = self.synth_term(b, depth, hints)
                return replace(t, left=a2, right=b2), Prod(ta, tb), _merge(c1, c2)
            case Next(b):
                b2, tb, c = self.synth_term(b, depth + 1, hints)
                return replace(t, body=b2), Later(tb), c
            case App(w, a):
                w2, wt = self._iso_for_app(w, None, delayed=False)
                a2, c = self.check_term(a, wt.dom, depth, hints)
                return replace(t, iso=w2, arg=a2), wt.cod, c
            case DelayedApp(w, a):
                w2, wt = self._iso_for_app(w, None, delayed=True)
                a2, c = self.check_term(a, Later(wt.dom), depth, hints)
                return replace(t, iso=w2, arg=a2), Later(wt.cod), c
            case LetPair():
                b2, pty, c1 = self.synth_term(t.bound, depth, hints)
                if not isinstance(pty, Prod):
                    raise TypeCheckError("TypeMismatch", f"let binds a pair but {pretty(pty)} is not one", _span(t))
                inner = dict(hints)
                inner.update({t.x: pty.left, t.y: pty.right})
                body2, ty, c2 = self.synth_term(t.body, depth, inner)
                c2 = self._pop_let(t, c2, pty, depth)
                return replace(t, bound=b2, body=body2, ann=pty), ty, _merge(c1, c2)
        raise _CannotInfer(f"cannot infer the type of {pretty(t)}", _span(t))

    def _iso_for_app(self, w: IsoExpr, cod, delayed: bool):
        """Type the iso in a (delayed) application; returns the underlying ``A <-> B``."""
        try:
            w2, wt = self.synth_iso(w)
        except _CannotInfer:
            if isinstance(w, Clauses) and cod is not None and not delayed:
                w2, wt = self._synth_clauses(w, cod=cod)
            else:
                raise
        if delayed:
            if not (isinstance(wt, LaterT) and isinstance(wt.body, IsoT)):
                raise TypeCheckError(
                    "NotAnIsoType", f"'@@' needs an iso of type @(A <-> B), got {pretty(wt)}", _span(w)
                )
            return w2, wt.body
        if not isinstance(wt, IsoT):
            raise TypeCheckError("NotAnIsoType", f"applied function has type {pretty(wt)}", _span(w))
        return w2, wt

    # --- isos

    def synth_iso(self, w: IsoExpr):
        match w:
            case FVar(n):
                if n not in self.psi:
                    raise TypeCheckError("UnboundVar", f"unknown iso {n}", _span(w))
                return w, self.psi[n]
            case Lambda(v, ty, body):
                ty = resolve_funty(ty, self.aliases)
                wf_funty(ty)
                inner = self._extend(v, ty)
                body2, tb = inner.synth_iso(body)
                return replace(w, ty=ty, body=body2), Arrow(ty, tb)
            case Fix(v, ty, body):
                # the annotation is the type of the recursive name, @T
                ty = resolve_funty(ty, self.aliases)
                wf_funty(ty)
                if not isinstance(ty, LaterT):
                    raise TypeCheckError(
                        "TypeMismatch", f"fix binder must have a delayed type @T, got {pretty(ty)}", _span(w)
                    )
                body2 = self._extend(v, ty).check_iso(body, ty.body)
                return replace(w, ty=ty, body=body2), ty.body
            case AppIso(f, a):
                f2, tf = self.synth_iso(f)
                if not isinstance(tf, Arrow):
                    raise TypeCheckError("TypeMismatch", f"{pretty(f)} : {pretty(tf)} is not a function", _span(w))
                a2 = self.check_iso(a, tf.arg)
                return replace(w, fun=f2, arg=a2), tf.res
            case NextIso(b):
                b2, tb = self.synth_iso(b)
                return replace(w, body=b2), LaterT(tb)
            case DelayedAppIso(f, a):
                f2, tf = self.synth_iso(f)
                if not (isinstance(tf, LaterT) and isinstance(tf.body, Arrow)):
                    raise TypeCheckError("TypeMismatch", f"'@@' needs @(T1 -> T2), got {pretty(tf)}", _span(w))
                a2 = self.check_iso(a, LaterT(tf.body.arg))
                return replace(w, fun=f2, arg=a2), LaterT(tf.body.res)
            case Clauses():
                return self._synth_clauses(w)
        raise TypeError(f"not an iso: {w!r}")

    def check_iso(self, w: IsoExpr, ty: FunTypeExpr) -> IsoExpr:
        match w, ty:
            case Clauses(), IsoT(a, b):
                return self.check_clauses(w, a, b)
            case Clauses(), _:
                raise TypeCheckError("TypeMismatch", f"clauses cannot have type {pretty(ty)}", _span(w))
            case Lambda(v, vty, body), Arrow(targ, tres):
                vty = resolve_funty(vty, self.aliases)
                if not funty_eq(vty, targ):
                    raise _mismatch(targ, vty, w)
                return replace(w, ty=vty, body=self._extend(v, vty).check_iso(body, tres))
            case NextIso(b), LaterT(inner):
                return replace(w, body=self.check_iso(b, inner))
        w2, got = self.synth_iso(w)
        if not funty_eq(got, ty):
            raise _mismatch(ty, got, w)
        return w2

    def _extend(self, name: str, ty: FunTypeExpr) -> "Checker":
        c = Checker.__new__(Checker)
        c.psi = dict(self.psi)
        c.psi[name] = ty
        c.aliases = self.aliases
        return c

    def _synth_clauses(self, w: Clauses, cod=None):
        """Recover ``A <-> B`` for an unannotated clause block when the sides allow it."""
        dom = None
        for lhs, rhs in w.clauses:
            hints = {}
            if cod is None:
                try:
                    _, cod, ctx = self.synth_term(rhs)
                    hints = {k: b.ty for k, b in ctx.items()}
                except _CannotInfer:
                    pass
            else:
                try:
                    _, ctx = self.check_term(rhs, cod)
                    hints = {k: b.ty for k, b in ctx.items()}
                except TypeCheckError:
                    pass
            if dom is None:
                try:
                    _, dom, _ = self.synth_term(lhs, 0, hints)
                except _CannotInfer:
                    pass
            if dom is not None and cod is not None:
                return self.check_clauses(w, dom, cod), IsoT(dom, cod)
        raise _CannotInfer("cannot infer the type of this clause block; give it a declared type", _span(w))

    def check_clauses(self, w: Clauses, a: TypeExpr, b: TypeExpr) -> Clauses:
        out = []
        for i, (lhs, rhs) in enumerate(w.clauses, start=1):
            l2, cl = self.check_term(lhs, a, 0)
            r2, cr = self.check_term(rhs, b, 0)
            if set(cl) != set(cr):
                only_l = sorted(set(cl) - set(cr))
                only_r = sorted(set(cr) - set(cl))
                raise TypeCheckError(
                    "ClauseContextMismatch",
                    f"clause {i}: left binds {only_l or '[]'} not used on the right, "
                    f"right uses {only_r or '[]'} not bound on the left",
                    _span(lhs),
                )
            for v in cl:
                if not type_eq(cl[v].ty, cr[v].ty):
                    raise TypeCheckError(
                        "ClauseContextMismatch",
                        f"clause {i}: {v} is {pretty(cl[v].ty)} on the left but {pretty(cr[v].ty)} on the right",
                        cr[v].span,
                    )
            if same_depth(lhs, rhs) is None:
                raise TypeCheckError(
                    "DepthMismatch",
                    f"clause {i}: {pretty(lhs)} and {pretty(rhs)} do not have the same depth",
                    _span(lhs),
                )
            for v in cl:
                if cl[v].latency != cr[v].latency:
                    raise TypeCheckError(
                        "LatencyMismatch",
                        f"clause {i}: {v} has latency {cl[v].latency} but is used under {cr[v].latency} next",
                        cr[v].span,
                    )
            out.append((l2, r2))
        for side, idx in (("left", 0), ("right", 1)):
            for i in range(len(out)):
                for j in range(i + 1, len(out)):
                    if not orthogonal(out[i][idx], out[j][idx]):
                        raise TypeCheckError(
                            "OverlappingPatterns",
                            f"{side} sides of clauses {i + 1} and {j + 1} overlap: "
                            f"{pretty(out[i][idx])} / {pretty(out[j][idx])}",
                            _span(out[j][idx]),
                        )
        ann = ClauseAnn(
            a, b,
            exhaustive([c[0] for c in out], a),
            exhaustive([c[1] for c in out], b),
        )
        return replace(w, clauses=tuple(out), ann=ann)


def infer_term(psi, delta: dict[str, tuple[TypeExpr, int]], t: TermExpr, expected: TypeExpr | None = None):
    """Type ``t`` in the linear context ``delta`` (name -> (type, latency))."""
    chk = psi if isinstance(psi, Checker) else Checker(psi)
    hints = {k: v[0] for k, v in delta.items()}
    if expected is None:
        _, ty, ctx = chk.synth_term(t, 0, hints)
    else:
        _, ctx = chk.check_term(t, expected, 0, hints)
        ty = expected
    for v, b in ctx.items():
        if v not in delta:
            raise TypeCheckError("UnboundVar", f"unbound variable {v}", b.span)
        want_ty, want_lat = delta[v]
        if not type_eq(want_ty, b.ty):
            raise _mismatch(want_ty, b.ty, t)
        if want_lat != b.latency:
            raise TypeCheckError(
                "LatencyMismatch", f"{v} has latency {want_lat} but is used under {b.latency} next", b.span
            )
    for v in delta:
        if v not in ctx:
            raise TypeCheckError("VarUnused", f"variable {v} is never used", _span(t))
    return ty


def check_iso(psi, w: IsoExpr, ty: FunTypeExpr | None = None):
    chk = psi if isinstance(psi, Checker) else Checker(psi)
    if ty is None:
        return chk.synth_iso(w)[1]
    chk.check_iso(w, ty)
    return ty


# ------------------------------------------------------------- programs


@dataclass
class CheckedProgram:
    program: Program
    aliases: dict[str, TypeExpr]
    iso_types: dict[str, FunTypeExpr]
    isos: dict[str, IsoExpr]
    term_types: dict[str, TypeExpr]
    terms: dict[str, TermExpr]
    diagnostics: list[dict]

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def check_program(prog: Program) -> CheckedProgram:
    """Check a desugared program, collecting one diagnostic per failing declaration."""
    aliases: dict[str, TypeExpr] = {}
    iso_types: dict[str, FunTypeExpr] = {}
    isos: dict[str, IsoExpr] = {}
    term_types: dict[str, TypeExpr] = {}
    terms: dict[str, TermExpr] = {}
    diags: list[dict] = []

    def report(d, e: TypeCheckError):
        rec = e.to_json()
        rec["decl"] = d.name
        if rec["span"] is None and d.pos:
            rec["span"] = list(d.pos)
        diags.append(rec)

    for d in prog.decls:
        try:
            match d:
                case TypeDecl(name, ty):
                    rt = resolve_type(ty, aliases)
                    wf_type((), rt)
                    aliases[name] = rt
                case IsoDecl(name, ty, body):
                    rt = resolve_funty(ty, aliases)
                    wf_funty(rt)
                    chk = Checker(iso_types, aliases)
                    isos[name] = chk.check_iso(body, rt)
                    iso_types[name] = rt
                case TermDecl(name, ty, body):
                    rt = resolve_type(ty, aliases)
                    wf_type((), rt)
                    chk = Checker(iso_types, aliases)
                    t2, ctx = chk.check_term(body, rt, 0)
                    if ctx:
                        v = sorted(ctx)[0]
                        raise TypeCheckError("UnboundVar", f"unbound variable {v}", ctx[v].span)
                    terms[name] = t2
                    term_types[name] = rt
        except TypeCheckError as e:
            report(d, e)
    return CheckedProgram(prog, aliases, iso_types, isos, term_types, terms, diags)
