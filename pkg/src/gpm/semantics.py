"""Stage-indexed denotations of terms and isos.

Terms denote morphisms from the tensor of their free variables to their type,
at one stage at a time.  An iso denotes the join of its clauses, each clause
being the right-hand side composed with the dagger of the left-hand side.

Function-level values are handled by staged normalization: lambda, application
and delay are interpreted directly on semantic values, and ``fix`` at stage
``n`` is its body unfolded ``n + 1`` times with a placeholder at the bottom.
Guardedness makes the placeholder unreachable at the stages it is used for.
"""

from __future__ import annotations

import threading
from typing import Callable

import numpy as np

from .category import (
    Backend,
    Elem,
    EPair,
    I,
    Inl,
    Inr,
    O,
    ObjShape,
    ProdO,
    STAR,
    SumO,
    enumerate_elems,
    render_shape,
)
from .errors import BackendUnsupported, ShapeStabilizationFailure, Undefined
from .guarded import Cochain, GuardedSession, StagedMor
from .hilb import CMatrix, HilbBackend, hadamard, principal_sqrt
from .syntax import (
    App,
    AppIso,
    Arrow,
    Clauses,
    DelayedApp,
    DelayedAppIso,
    Fix,
    Fold,
    FunTypeExpr,
    FVar,
    InL,
    InR,
    IsoExpr,
    IsoT,
    Lambda,
    Later,
    LaterT,
    LetPair,
    Mu,
    Next,
    NextIso,
    One,
    Pair,
    Prod,
    Sum,
    TermExpr,
    TypeExpr,
    Unit,
    Var,
    free_vars,
    pretty,
)
from .typecheck import PRIMITIVE_TYPES, CheckedProgram, unfold

# ---------------------------------------------------------- semantic values


class IsoVal:
    """A first-order iso: one backend morphism ``dom(n) -> cod(n)`` per stage."""

    def __init__(self, ty: IsoT, at: Callable[[int], object], label: str = "iso"):
        self.ty = ty
        self._at = at
        self._memo: dict[int, object] = {}
        self.label = label

    def at(self, n: int):
        if n not in self._memo:
            self._memo[n] = self._at(n)
        return self._memo[n]


class LaterVal:
    """A delayed value; its stage ``n`` is the stage ``n - 1`` of the content."""

    def __init__(self, ty: LaterT, thunk: Callable[[], object]):
        self.ty = ty
        self._thunk = thunk
        self._value = None
        self._lock = threading.Lock()

    def force(self):
        if self._value is None:
            with self._lock:
                if self._value is None:
                    self._value = self._thunk()
        return self._value


class FunVal:
    def __init__(self, ty: Arrow, fn: Callable[[object], object]):
        self.ty = ty
        self._fn = fn
        self._memo: dict[int, tuple] = {}

    def apply(self, arg):
        hit = self._memo.get(id(arg))
        if hit is None:
            hit = (arg, self._fn(arg))
            self._memo[id(arg)] = hit
        return hit[1]


class Truncated:
    """A value known through approximants; ``approx(n)`` is exact up to stage ``n``."""

    def __init__(self, ty: FunTypeExpr, approx: Callable[[int], object]):
        self.ty = ty
        self._approx = approx
        self._memo: dict[int, object] = {}
        self._applied: dict[int, tuple] = {}
        self._forced = None

    def approx(self, n: int):
        if n not in self._memo:
            self._memo[n] = self._approx(n)
        return self._memo[n]

    def at(self, n: int):
        return at(self.approx(n), n)

    def apply(self, arg):
        hit = self._applied.get(id(arg))
        if hit is None:
            hit = (arg, Truncated(self.ty.res, lambda m: apply(self.approx(m), arg)))
            self._applied[id(arg)] = hit
        return hit[1]

    def force(self):
        if self._forced is None:
            self._forced = Truncated(self.ty.body, lambda m: force(self.approx(m + 1)))
        return self._forced


def at(v, n: int):
    if not isinstance(v.ty, IsoT):
        raise TypeError(f"value of type {pretty(v.ty)} has no stage components")
    return v.at(n)


def apply(f, arg):
    return f.apply(arg)


def force(v):
    return v.force()


class FixVal(Truncated):
    """``fix``: approximant ``n`` is the body with the name bound to approximant ``n - 1``."""

    def __init__(self, ty: FunTypeExpr, step: Callable[[object], object], bottom: object):
        self.unfoldings = 0
        self._step = step
        self._bottom = bottom
        self._lock = threading.RLock()
        super().__init__(ty, self._unfold)

    def _unfold(self, n: int):
        with self._lock:
            prev = self._bottom if n == 0 else self.approx(n - 1)
            self.unfoldings += 1
            return self._step(LaterVal(LaterT(self.ty), lambda: prev))


# -------------------------------------------------------------- contexts


def ctx_tree(names):
    """Right-nested tensor layout of a variable list; ``None`` is the unit."""
    names = list(names)
    if not names:
        return None
    if len(names) == 1:
        return names[0]
    return (names[0], ctx_tree(names[1:]))


def _decompose(tree, e: Elem, out: dict) -> None:
    if tree is None:
        return
    if isinstance(tree, str):
        out[tree] = e
        return
    _decompose(tree[0], e.left, out)
    _decompose(tree[1], e.right, out)


def _recompose(tree, d: dict) -> Elem:
    if tree is None:
        return STAR
    if isinstance(tree, str):
        return d[tree]
    return EPair(_recompose(tree[0], d), _recompose(tree[1], d))


# ----------------------------------------------------------------- session


def default_placeholder(backend: Backend, ty: FunTypeExpr, shape_of):
    """The zero value of a function type."""
    match ty:
        case IsoT(a, b):
            return IsoVal(ty, lambda n: backend.zero_mor(shape_of(a, n), shape_of(b, n)), "zero")
        case LaterT(body):
            return LaterVal(ty, lambda: default_placeholder(backend, body, shape_of))
        case Arrow(_, res):
            return FunVal(ty, lambda _a: default_placeholder(backend, res, shape_of))
    raise TypeError(f"not a function type: {ty!r}")


def iso_type(w: IsoExpr, tenv: dict[str, FunTypeExpr]) -> FunTypeExpr:
    """Type of an elaborated iso expression, read off its annotations."""
    match w:
        case FVar(n):
            return tenv[n]
        case Clauses(ann=ann):
            if ann is None:
                raise ValueError("clause block was not elaborated by the typechecker")
            return IsoT(ann.dom, ann.cod)
        case Lambda(v, ty, body):
            inner = dict(tenv)
            inner[v] = ty
            return Arrow(ty, iso_type(body, inner))
        case AppIso(f, _):
            return iso_type(f, tenv).res
        case Fix(ty=ty):
            return ty.body
        case NextIso(b):
            return LaterT(iso_type(b, tenv))
        case DelayedAppIso(f, _):
            return LaterT(iso_type(f, tenv).body.res)
    raise TypeError(f"not an iso: {w!r}")


class Semantics:
    """Denotations over one backend for one checked program."""

    def __init__(self, backend: Backend, program: CheckedProgram | None = None,
                 placeholder: Callable[[FunTypeExpr], object] | None = None):
        self.backend = backend
        self.guarded = GuardedSession(backend)
        self.program = program
        self._placeholder = placeholder
        self._route_cache: dict[tuple, object] = {}
        self._globals: dict[str, object] = {}
        self._lock = threading.RLock()
        self.env: dict[str, object] = {}
        self._install_primitives()
        if program is not None:
            for name in program.isos:
                self.env[name] = self._lazy_global(name)

    # --- plumbing

    def cochain(self, ty: TypeExpr) -> Cochain:
        return self.guarded.denote_type(ty)

    def shape_of(self, ty: TypeExpr, n: int) -> ObjShape:
        return self.cochain(ty).stage(n)

    def placeholder(self, ty: FunTypeExpr):
        if self._placeholder is not None:
            return self._placeholder(ty)
        return default_placeholder(self.backend, ty, self.shape_of)

    def _lazy_global(self, name: str):
        prog = self.program
        ty = prog.iso_types[name]

        def build():
            if name not in self._globals:
                self._globals[name] = self.eval_iso(prog.isos[name], self.env)
            return self._globals[name]

        # a proxy keeps declaration order irrelevant
        return _Proxy(ty, build)

    def _install_primitives(self):
        b = self.backend
        qubit = PRIMITIVE_TYPES["had"]

        def need_hilb(what):
            if not isinstance(b, HilbBackend):
                raise BackendUnsupported(f"{what} needs the hilb backend, not {b.name}")

        q = SumO(I, I)

        def had_at(n):
            need_hilb("had")
            return CMatrix(q, q, hadamard())

        def half_fn(u):
            def half_at(n):
                need_hilb("half")
                return CMatrix(q, q, principal_sqrt(at(u, n).m, getattr(b, "tol", 1e-9)))

            return IsoVal(qubit, half_at, "half")

        self.env["had"] = IsoVal(qubit, had_at, "had")
        self.env["half"] = FunVal(PRIMITIVE_TYPES["half"], half_fn)

    def iso(self, name: str):
        v = self.env[name]
        return v.resolve() if isinstance(v, _Proxy) else v

    # --- function-level evaluation

    def eval_iso(self, w: IsoExpr, env: dict):
        tenv = {k: v.ty for k, v in env.items()}
        match w:
            case FVar(n):
                v = env[n]
                return v.resolve() if isinstance(v, _Proxy) else v
            case Clauses():
                ty = iso_type(w, tenv)
                return IsoVal(ty, lambda n: self.denote_clauses(w, n, env), "clauses")
            case Lambda(v, ty, body):
                fty = iso_type(w, tenv)

                def fn(arg, v=v, body=body):
                    inner = dict(env)
                    inner[v] = arg
                    return self.eval_iso(body, inner)

                return FunVal(fty, fn)
            case AppIso(f, a):
                return apply(self.eval_iso(f, env), self.eval_iso(a, env))
            case NextIso(b):
                return LaterVal(iso_type(w, tenv), lambda: self.eval_iso(b, env))
            case DelayedAppIso(f, a):
                fv, av = self.eval_iso(f, env), self.eval_iso(a, env)
                return LaterVal(iso_type(w, tenv), lambda: apply(force(fv), force(av)))
            case Fix(v, ty, body):

                def step(slot, v=v, body=body):
                    inner = dict(env)
                    inner[v] = slot
                    return self.eval_iso(body, inner)

                return FixVal(ty.body, step, self.placeholder(ty.body))
        raise TypeError(f"not an iso: {w!r}")

    def denote_iso(self, w: IsoExpr | str, n: int, env: dict | None = None):
        """Stage-``n`` morphism of a first-order iso (by name or expression)."""
        if isinstance(w, str):
            return at(self.iso(w), n)
        return at(self.eval_iso(w, self.env if env is None else env), n)

    def staged(self, v) -> StagedMor:
        """The family of stage components of an iso value."""
        ty = v.ty
        return StagedMor(self.cochain(ty.dom), self.cochain(ty.cod), lambda n: at(v, n), getattr(v, "label", "iso"))

    # --- clauses

    def denote_clauses(self, w: Clauses, n: int, env: dict):
        b = self.backend
        ann = w.ann
        src, dst = self.shape_of(ann.dom, n), self.shape_of(ann.cod, n)
        parts = [self.denote_clause(lhs, rhs, ann.dom, ann.cod, n, env) for lhs, rhs in w.clauses]
        return b.join_all(src, dst, parts)

    def denote_clause(self, lhs: TermExpr, rhs: TermExpr, a: TypeExpr, bty: TypeExpr, n: int, env: dict):
        """``⟦rhs⟧ ∘ ⟦lhs⟧†`` with the context ordered by first use on the left."""
        b = self.backend
        tys: dict[str, TypeExpr] = {}
        self.var_types(lhs, a, env, tys)
        self.var_types(rhs, bty, env, tys)
        order = free_vars(lhs)
        left = self.denote_term(lhs, a, n, env, order, tys)
        right = self.denote_term(rhs, bty, n, env, order, tys)
        return b.compose(right, b.dagger(left))

    # --- terms

    def var_types(self, t: TermExpr, ty: TypeExpr, env: dict, out: dict) -> None:
        match t:
            case Var(x):
                out[x] = ty
            case Unit():
                pass
            case InL(s):
                self.var_types(s, ty.left, env, out)
            case InR(s):
                self.var_types(s, ty.right, env, out)
            case Pair(l, r):
                self.var_types(l, ty.left, env, out)
                self.var_types(r, ty.right, env, out)
            case Fold(s):
                self.var_types(s, unfold(ty), env, out)
            case Next(s):
                self.var_types(s, ty.body, env, out)
            case App(w, s):
                wt = self._iso_ty(w, env)
                self.var_types(s, wt.dom, env, out)
            case DelayedApp(w, s):
                wt = self._iso_ty(w, env)
                self.var_types(s, Later(wt.body.dom), env, out)
            case LetPair(x, y, bound, body, ann=pty):
                self.var_types(bound, pty, env, out)
                out[x], out[y] = pty.left, pty.right
                self.var_types(body, ty, env, out)
            case _:
                raise TypeError(f"not a term: {t!r}")

    def _iso_ty(self, w: IsoExpr, env: dict) -> FunTypeExpr:
        return iso_type(w, {k: v.ty for k, v in env.items()})

    def ctx_shape(self, tree, tys: dict, n: int) -> ObjShape:
        if tree is None:
            return I
        if isinstance(tree, str):
            return self.shape_of(tys[tree], n)
        return ProdO(self.ctx_shape(tree[0], tys, n), self.ctx_shape(tree[1], tys, n))

    def route(self, src_tree, dst_tree, tys: dict, n: int):
        """Rewiring of the same variables between two tensor layouts."""
        src = self.ctx_shape(src_tree, tys, n)
        dst = self.ctx_shape(dst_tree, tys, n)
        if src_tree == dst_tree:
            return self.backend.identity(src)
        key = (src_tree, dst_tree, src, dst)
        hit = self._route_cache.get(key)
        if hit is None:
            mapping = {}
            for e in enumerate_elems(src):
                d: dict = {}
                _decompose(src_tree, e, d)
                mapping[e] = _recompose(dst_tree, d)
            hit = self.backend.lift(src, dst, mapping)
            self._route_cache[key] = hit
        return hit

    def denote_term(self, t: TermExpr, ty: TypeExpr, n: int, env: dict | None = None,
                    order: list[str] | None = None, tys: dict | None = None):
        """``⟦Δ ⊢ t : ty⟧`` at stage ``n``; ``Δ`` is laid out as ``ctx_tree(order)``."""
        env = self.env if env is None else env
        if tys is None:
            tys = {}
            self.var_types(t, ty, env, tys)
        own = free_vars(t)
        order = own if order is None else list(order)
        if sorted(order) != sorted(own):
            raise ValueError(f"context {order} does not match the free variables {own} of {pretty(t)}")
        m = self._den(t, ty, n, env, tys)
        return self.backend.compose(m, self.route(ctx_tree(order), ctx_tree(own), tys, n))

    def _den(self, t: TermExpr, ty: TypeExpr, n: int, env: dict, tys: dict):
        """Morphism from the layout ``ctx_tree(free_vars(t))``."""
        b = self.backend
        match t:
            case Unit():
                return b.identity(I)
            case Var():
                return b.identity(self.shape_of(ty, n))
            case InL(s) | InR(s):
                left, right = self.shape_of(ty.left, n), self.shape_of(ty.right, n)
                inner = self._den(s, ty.left if isinstance(t, InL) else ty.right, n, env, tys)
                inj = b.inj1(left, right) if isinstance(t, InL) else b.inj2(left, right)
                return b.compose(inj, inner)
            case Pair(l, r):
                fl, fr = free_vars(l), free_vars(r)
                body = b.tensor_prod(self._den(l, ty.left, n, env, tys), self._den(r, ty.right, n, env, tys))
                return b.compose(body, self.route(ctx_tree(fl + fr), (ctx_tree(fl), ctx_tree(fr)), tys, n))
            case Fold(s):
                inner_ty = unfold(ty)
                m = self._den(s, inner_ty, n, env, tys)
                got, want = self.shape_of(inner_ty, n), self.shape_of(ty, n)
                if got != want:
                    raise ShapeStabilizationFailure(
                        f"fold at stage {n}: {render_shape(got)} vs {render_shape(want)}"
                    )
                return m
            case Next(s):
                src = self.ctx_shape(ctx_tree(free_vars(s)), tys, n)
                if n == 0:
                    return b.zero_mor(src, O)
                c = self.cochain(ty.body)
                return b.compose(c.restriction(n - 1), self._den(s, ty.body, n, env, tys))
            case App(w, s):
                v = self.eval_iso(w, env)
                return b.compose(at(v, n), self._den(s, v.ty.dom, n, env, tys))
            case DelayedApp(w, s):
                v = self.eval_iso(w, env)
                if n == 0:
                    return b.zero_mor(self.ctx_shape(ctx_tree(free_vars(s)), tys, 0), O)
                inner = force(v)
                arg = self._den(s, Later(inner.ty.dom), n, env, tys)
                return b.compose(at(inner, n - 1), arg)
            case LetPair(x, y, bound, body, ann=pty):
                fb = free_vars(bound)
                rest = [v for v in free_vars(body) if v not in (x, y)]
                own = fb + rest
                step1 = self.route(ctx_tree(own), (ctx_tree(rest), ctx_tree(fb)), tys, n)
                mid = b.tensor_prod(
                    b.identity(self.ctx_shape(ctx_tree(rest), tys, n)),
                    self._den(bound, pty, n, env, tys),
                )
                step2 = self.route((ctx_tree(rest), (x, y)), ctx_tree(free_vars(body)), tys, n)
                return b.compose_all(self._den(body, ty, n, env, tys), step2, mid, step1)
        raise TypeError(f"not a term: {t!r}")

    # --- closed terms and points

    def term(self, name: str, n: int):
        prog = self.program
        return self.denote_term(prog.terms[name], prog.term_types[name], n)

    def point(self, v, ty: TypeExpr, n: int):
        """The morphism ``I -> ty(n)`` picking out a value; ``Undefined`` if too deep."""
        return self.backend.point(self.shape_of(ty, n), elem_of_value(v, ty, n))

    def fix_iterate(self, w: Fix, n: int, env: dict | None = None):
        """Stage ``n`` of an iso-typed ``fix`` by iterating the body stage by stage.

        Stage ``k`` evaluates the body once with the recursive name bound to a
        delayed iso whose components are the previously computed stages.
        """
        env = self.env if env is None else env
        ty = w.ty.body
        if not isinstance(ty, IsoT):
            raise TypeError("the iterate formula applies to fix at an iso type")
        table: list = []

        def lookup(j: int):
            if j >= len(table):
                raise AssertionError(f"stage {j} requested before it was computed")
            return table[j]

        for k in range(n + 1):
            slot = LaterVal(LaterT(ty), lambda: IsoVal(ty, lookup, "table"))
            inner = dict(env)
            inner[w.var] = slot
            table.append(at(self.eval_iso(w.body, inner), k))
        return table[n]


class _Proxy:
    """A named global whose value is built on first use."""

    def __init__(self, ty: FunTypeExpr, build: Callable[[], object]):
        self.ty = ty
        self._build = build

    def resolve(self):
        return self._build()


# ------------------------------------------------------------------ points


def elem_of_value(v, ty: TypeExpr, n: int) -> Elem:
    """The element of ``ty(n)`` a closed value stands for at stage ``n``."""
    from .evaluator import VFold, VInl, VInr, VNext, VPair, VUnit

    match v, ty:
        case VUnit(), One():
            return STAR
        case VInl(x), Sum(a, _):
            return Inl(elem_of_value(x, a, n))
        case VInr(x), Sum(_, b):
            return Inr(elem_of_value(x, b, n))
        case VPair(x, y), Prod(a, b):
            return EPair(elem_of_value(x, a, n), elem_of_value(y, b, n))
        case VFold(x), Mu():
            return elem_of_value(x, unfold(ty), n)
        case VNext(), Later(b):
            if n == 0:
                raise Undefined("a delayed value has no element at stage 0")
            return elem_of_value(v.value(), b, n - 1)
    raise TypeError(f"value {v!r} does not have type {pretty(ty)}")


def hilb_block(f: CMatrix, rows: list[Elem], cols: list[Elem]) -> np.ndarray:
    """Sub-matrix of ``f`` on the given output and input elements."""
    from .category import elem_index

    ri, ci = elem_index(f.dst), elem_index(f.src)
    return f.m[np.ix_([ri[r] for r in rows], [ci[c] for c in cols])]


def value_of_elem(e: Elem, ty: TypeExpr, n: int):
    """The closed value standing for element ``e`` of ``ty(n)``."""
    from .evaluator import UNIT, VFold, VInl, VInr, VNext, VPair

    match ty:
        case One():
            return UNIT
        case Sum(a, b):
            if isinstance(e, Inl):
                return VInl(value_of_elem(e.inner, a, n))
            return VInr(value_of_elem(e.inner, b, n))
        case Prod(a, b):
            return VPair(value_of_elem(e.left, a, n), value_of_elem(e.right, b, n))
        case Mu():
            return VFold(value_of_elem(e, unfold(ty), n))
        case Later(b):
            if n == 0:
                raise Undefined("the delayed type has no elements at stage 0")
            return VNext(value_of_elem(e, b, n - 1))
    raise TypeError(f"no values of type {pretty(ty)}")
