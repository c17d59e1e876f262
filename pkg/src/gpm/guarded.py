"""Stage-indexed objects over a backend.

A cochain is a sequence of objects ``X(0), X(1), ...`` with restrictions
``X(n+1) -> X(n)`` that are dagger epimorphisms.  Staged morphisms are natural
families of backend morphisms.  Types denote cochains; recursive types are
computed by iterating their functor from the zero cochain and reading stage
``n`` off the ``n+1``-th approximant.
"""

from __future__ import annotations

import os
import threading
from typing import Callable, Mapping

from .category import Backend, O, I, ObjShape, ProdO, SumO, render_shape
from .errors import ShapeMismatch, ShapeStabilizationFailure
from .syntax import Later, Mu, One, Prod, Sum, TVar, TypeExpr, Zero
from .typecheck import _nameless, subst_type

DEFAULT_STAGE_BOUND = 8


def stage_bound() -> int:
    """Default bound for law checks; ``GPM_STAGE_BOUND`` overrides it."""
    raw = os.environ.get("GPM_STAGE_BOUND")
    if raw is None or raw.strip() == "":
        return DEFAULT_STAGE_BOUND
    n = int(raw)
    if n < 0:
        raise ValueError("GPM_STAGE_BOUND must be non-negative")
    return n


class _Memo:
    """Stage-indexed memo table filled in increasing order on demand."""

    __slots__ = ("fn", "table", "lock")

    def __init__(self, fn: Callable[[int], object]):
        self.fn = fn
        self.table: dict[int, object] = {}
        self.lock = threading.RLock()

    def __call__(self, n: int):
        if n < 0:
            raise ValueError(f"negative stage {n}")
        t = self.table
        if n in t:
            return t[n]
        with self.lock:
            if n not in t:
                t[n] = self.fn(n)
            return t[n]


class Cochain:
    __slots__ = ("backend", "label", "_stage", "_restr")

    def __init__(self, backend: Backend, stage: Callable[[int], ObjShape],
                 restriction: Callable[[int], object], label: str = "?"):
        self.backend = backend
        self.label = label
        self._stage = _Memo(stage)
        self._restr = _Memo(restriction)

    def stage(self, n: int) -> ObjShape:
        return self._stage(n)

    def restriction(self, n: int):
        """``r_n : X(n+1) -> X(n)``."""
        return self._restr(n)

    def dims(self, upto: int) -> list[int]:
        from .category import dim

        return [dim(self.stage(n)) for n in range(upto + 1)]

    def __repr__(self) -> str:
        return f"Cochain({self.label})"


class StagedMor:
    __slots__ = ("src", "dst", "_comp", "label")

    def __init__(self, src: Cochain, dst: Cochain, component: Callable[[int], object], label: str = "?"):
        self.src = src
        self.dst = dst
        self._comp = _Memo(component)
        self.label = label

    def at(self, n: int):
        return self._comp(n)

    @property
    def backend(self) -> Backend:
        return self.src.backend

    def __repr__(self) -> str:
        return f"StagedMor({self.label}: {self.src.label} -> {self.dst.label})"


# ---------------------------------------------------------------- cochains


def zero_cochain(backend: Backend) -> Cochain:
    return Cochain(backend, lambda n: O, lambda n: backend.identity(O), "0")


def constant_cochain(backend: Backend, s: ObjShape) -> Cochain:
    return Cochain(backend, lambda n: s, lambda n: backend.identity(s), render_shape(s))


def sum_cochain(x: Cochain, y: Cochain) -> Cochain:
    b = x.backend
    return Cochain(
        b,
        lambda n: SumO(x.stage(n), y.stage(n)),
        lambda n: b.tensor_sum(x.restriction(n), y.restriction(n)),
        f"({x.label} + {y.label})",
    )


def prod_cochain(x: Cochain, y: Cochain) -> Cochain:
    b = x.backend
    return Cochain(
        b,
        lambda n: ProdO(x.stage(n), y.stage(n)),
        lambda n: b.tensor_prod(x.restriction(n), y.restriction(n)),
        f"({x.label} * {y.label})",
    )


def later(x: Cochain) -> Cochain:
    b = x.backend
    return Cochain(
        b,
        lambda n: O if n == 0 else x.stage(n - 1),
        lambda n: b.bang(x.stage(0)) if n == 0 else x.restriction(n - 1),
        f"@{x.label}",
    )


# ------------------------------------------------------- staged morphisms


def identity_mor(x: Cochain) -> StagedMor:
    return StagedMor(x, x, lambda n: x.backend.identity(x.stage(n)), f"id {x.label}")


def bang_mor(x: Cochain, z: Cochain | None = None) -> StagedMor:
    """The unique staged morphism into the zero cochain."""
    z = z or zero_cochain(x.backend)
    return StagedMor(x, z, lambda n: x.backend.bang(x.stage(n)), f"! {x.label}")


def next_mor(x: Cochain, lx: Cochain | None = None) -> StagedMor:
    lx = lx or later(x)
    b = x.backend
    return StagedMor(
        x, lx, lambda n: b.bang(x.stage(0)) if n == 0 else x.restriction(n - 1), f"next {x.label}"
    )


def compose_mor(g: StagedMor, f: StagedMor) -> StagedMor:
    b = f.backend
    return StagedMor(f.src, g.dst, lambda n: b.compose(g.at(n), f.at(n)), f"{g.label} . {f.label}")


def dagger_mor(f: StagedMor) -> StagedMor:
    """Pointwise dagger; natural exactly when ``f`` is daggerable."""
    b = f.backend
    return StagedMor(f.dst, f.src, lambda n: b.dagger(f.at(n)), f"{f.label}†")


def sum_mor(f: StagedMor, g: StagedMor) -> StagedMor:
    b = f.backend
    return StagedMor(
        sum_cochain(f.src, g.src), sum_cochain(f.dst, g.dst),
        lambda n: b.tensor_sum(f.at(n), g.at(n)), f"({f.label} + {g.label})",
    )


def conjugate_by_next(f: StagedMor) -> StagedMor:
    """``next_Y ∘ f ∘ next_X†`` as a morphism ``@X -> @Y``: a shift by one stage."""
    b = f.backend
    return StagedMor(
        later(f.src), later(f.dst),
        lambda n: b.identity(O) if n == 0 else f.at(n - 1),
        f"@{f.label}",
    )


def restrict_hom(f, x: Cochain, y: Cochain, n: int):
    """``r^Y_n ∘ f ∘ (r^X_n)†`` for ``f : X(n+1) -> Y(n+1)``."""
    b = x.backend
    if b.src(f) != x.stage(n + 1) or b.dst(f) != y.stage(n + 1):
        raise ShapeMismatch(
            f"restrict_hom: morphism {render_shape(b.src(f))} → {render_shape(b.dst(f))} "
            f"does not live at stage {n + 1}"
        )
    return b.compose_all(y.restriction(n), f, b.dagger(x.restriction(n)))


def is_natural(f: StagedMor, bound: int | None = None) -> bool:
    bound = stage_bound() if bound is None else bound
    b = f.backend
    return all(
        b.eq(b.compose(f.at(n), f.src.restriction(n)), b.compose(f.dst.restriction(n), f.at(n + 1)))
        for n in range(bound)
    )


def naturality_failure(f: StagedMor, bound: int | None = None) -> int | None:
    bound = stage_bound() if bound is None else bound
    b = f.backend
    for n in range(bound):
        if not b.eq(b.compose(f.at(n), f.src.restriction(n)), b.compose(f.dst.restriction(n), f.at(n + 1))):
            return n
    return None


def daggerability_failure(f: StagedMor, bound: int | None = None) -> int | None:
    """First ``n`` where ``f†_n ∘ r^Y_n ≠ r^X_n ∘ f†_{n+1}``, or ``None``."""
    bound = stage_bound() if bound is None else bound
    b = f.backend
    for n in range(bound):
        lhs = b.compose(b.dagger(f.at(n)), f.dst.restriction(n))
        rhs = b.compose(f.src.restriction(n), b.dagger(f.at(n + 1)))
        if not b.eq(lhs, rhs):
            return n
    return None


def is_daggerable(f: StagedMor, bound: int | None = None) -> bool:
    return daggerability_failure(f, bound) is None


def restrictions_dagger_epi(x: Cochain, bound: int | None = None) -> bool:
    bound = stage_bound() if bound is None else bound
    return all(x.backend.is_dagger_epi(x.restriction(n)) for n in range(bound))


def is_n_iso(f: StagedMor, n: int) -> bool:
    """The components at stages ``0 .. n-1`` are dagger isomorphisms."""
    return all(f.backend.is_dagger_iso(f.at(k)) for k in range(n))


# ------------------------------------------------------------ type denotation

Env = Mapping[str, Cochain]


class GuardedSession:
    """Denotes types over one backend, sharing cochains between requests."""

    def __init__(self, backend: Backend):
        self.backend = backend
        self.zero = zero_cochain(backend)
        self.unit = constant_cochain(backend, I)
        self._cache: dict[tuple, Cochain] = {}
        self._act_cache: dict[tuple, StagedMor] = {}
        self._lock = threading.RLock()

    @staticmethod
    def _env_key(t: TypeExpr, env: Env) -> tuple:
        from .typecheck import free_type_vars

        return tuple(sorted((v, id(env[v])) for v in free_type_vars(t) if v in env))

    def denote_type(self, t: TypeExpr, env: Env | None = None) -> Cochain:
        env = dict(env or {})
        key = (_nameless(t), self._env_key(t, env))
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                return hit
            c = self._denote(t, env)
            self._cache[key] = c
            return c

    def _denote(self, t: TypeExpr, env: dict) -> Cochain:
        match t:
            case Zero():
                return self.zero
            case One():
                return self.unit
            case TVar(v):
                if v not in env:
                    raise KeyError(f"type variable {v} has no cochain")
                return env[v]
            case Sum(a, b):
                return sum_cochain(self.denote_type(a, env), self.denote_type(b, env))
            case Prod(a, b):
                return prod_cochain(self.denote_type(a, env), self.denote_type(b, env))
            case Later(a):
                return later(self.denote_type(a, env))
            case Mu():
                return self._denote_mu(t, env)
        raise TypeError(f"cannot denote {t!r}")

    # the k-th approximant C_k = F^k(zero) of a recursive type
    def approximants(self, t: Mu, env: Env) -> Callable[[int], Cochain]:
        env = dict(env)
        chain: list[Cochain] = [self.zero]

        def get(k: int) -> Cochain:
            with self._lock:
                while len(chain) <= k:
                    inner = dict(env)
                    inner[t.var] = chain[-1]
                    chain.append(self.denote_type(t.body, inner))
                return chain[k]

        return get

    def _denote_mu(self, t: Mu, env: dict) -> Cochain:
        approx = self.approximants(t, env)
        # g_k : C_{k+1} -> C_k, with g_0 the unique map to zero
        links: list[StagedMor] = []

        def link(k: int) -> StagedMor:
            with self._lock:
                while len(links) <= k:
                    j = len(links)
                    if j == 0:
                        links.append(bang_mor(approx(1), self.zero))
                    else:
                        links.append(self.act(t.body, env, {t.var: link(j - 1)}))
                return links[k]

        b = self.backend

        def stage(n: int) -> ObjShape:
            return approx(n + 1).stage(n)

        def restriction(n: int):
            return b.compose(link(n + 1).at(n), approx(n + 2).restriction(n))

        return Cochain(b, stage, restriction, f"mu {t.var}")

    def act(self, t: TypeExpr, env: Env, fenv: Mapping[str, StagedMor]) -> StagedMor:
        """The action of ``t``, as a functor of the variables in ``fenv``, on those morphisms.

        Variables outside ``fenv`` keep their cochain from ``env`` and act by identity.
        """
        env_src = dict(env)
        env_dst = dict(env)
        for v, f in fenv.items():
            env_src[v] = f.src
            env_dst[v] = f.dst
        key = (
            _nameless(t), self._env_key(t, env_src), self._env_key(t, env_dst),
            tuple(sorted((v, id(f)) for v, f in fenv.items())),
        )
        with self._lock:
            hit = self._act_cache.get(key)
            if hit is not None:
                return hit[0]
            m = self._act(t, env, env_src, env_dst, fenv)
            # keep the morphisms alive so their ids stay unique
            self._act_cache[key] = (m, tuple(fenv.values()))
            return m

    def _act(self, t, env, env_src, env_dst, fenv) -> StagedMor:
        b = self.backend
        src = self.denote_type(t, env_src)
        dst = self.denote_type(t, env_dst)
        match t:
            case Zero() | One():
                return identity_mor(src)
            case TVar(v):
                if v in fenv:
                    return fenv[v]
                return identity_mor(src)
            case Sum(l, r) | Prod(l, r):
                fl = self.act(l, env, fenv)
                fr = self.act(r, env, fenv)
                op = b.tensor_sum if isinstance(t, Sum) else b.tensor_prod
                return StagedMor(src, dst, lambda n: op(fl.at(n), fr.at(n)), "act")
            case Later(a):
                fa = self.act(a, env, fenv)
                return StagedMor(src, dst, lambda n: b.identity(O) if n == 0 else fa.at(n - 1), "act")
            case Mu(y, body):
                fenv_in = {k: f for k, f in fenv.items() if k != y}
                if not fenv_in:
                    return identity_mor(src)
                steps: list[StagedMor] = []

                def step(k: int) -> StagedMor:
                    # h_k : C^src_k -> C^dst_k
                    with self._lock:
                        while len(steps) <= k:
                            j = len(steps)
                            if j == 0:
                                steps.append(identity_mor(self.zero))
                            else:
                                fe = dict(fenv_in)
                                fe[y] = step(j - 1)
                                base = dict(env)
                                base.pop(y, None)
                                steps.append(self.act(body, base, fe))
                        return steps[k]

                return StagedMor(src, dst, lambda n: step(n + 1).at(n), "act")
        raise TypeError(f"cannot act with {t!r}")

    def functor_on_mor(self, t: TypeExpr, var: str, f: StagedMor, env: Env | None = None) -> StagedMor:
        return self.act(t, dict(env or {}), {var: f})

    def fold_iso(self, mu: Mu, env: Env | None = None) -> StagedMor:
        """``F(mu) -> mu`` with identity components; asserts the two shapes agree."""
        env = dict(env or {})
        omega = self.denote_type(mu, env)
        inner = dict(env)
        inner[mu.var] = omega
        unfolded = self.denote_type(mu.body, inner)
        b = self.backend

        def comp(n: int):
            s, t = unfolded.stage(n), omega.stage(n)
            if s != t:
                raise ShapeStabilizationFailure(
                    f"stage {n}: unfolding gives {render_shape(s)} but the fixed point has {render_shape(t)}"
                )
            return b.identity(s)

        return StagedMor(unfolded, omega, comp, f"fold {mu.var}")

    def unfold_type_cochain(self, mu: Mu, env: Env | None = None) -> Cochain:
        """The cochain of ``B[mu X.B / X]`` computed by substitution."""
        return self.denote_type(subst_type(mu.body, mu.var, mu), env)

    def iterate_shape(self, mu: Mu, m: int, j: int, env: Env | None = None) -> ObjShape:
        """Shape of ``F^m(zero)`` at stage ``j``."""
        return self.approximants(mu, dict(env or {}))(m).stage(j)


def shapes_stable(session: GuardedSession, mu: Mu, j: int, extra: int = 4, env: Env | None = None) -> bool:
    """``F^m(zero)(j)`` has one shape for every ``m`` in ``j+1 .. j+extra``."""
    first = session.iterate_shape(mu, j + 1, j, env)
    return all(session.iterate_shape(mu, m, j, env) == first for m in range(j + 2, j + extra + 1))
