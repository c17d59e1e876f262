"""Law checks over the demo corpus and seeded random types and isos.

Each suite yields ``Check`` records.  The command line and the test-suite both
run the same functions, so a report from one is reproducible with the other.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator

import numpy as np

from .category import O, ProdO, SumO, dim, enumerate_elems
from .errors import GpmError
from .evaluator import UNIT, Evaluator, VFold, VInl, VInr, VNext, VPair, defined_at, force
from .guarded import (
    Cochain,
    GuardedSession,
    StagedMor,
    bang_mor,
    conjugate_by_next,
    daggerability_failure,
    identity_mor,
    is_n_iso,
    later,
    naturality_failure,
    next_mor,
    prod_cochain,
    restrict_hom,
    restrictions_dagger_epi,
    shapes_stable,
    sum_cochain,
)
from .hilb import CMatrix, HilbBackend
from .pinj import PInjBackend, PInjMor
from .semantics import (
    FunVal,
    IsoVal,
    LaterVal,
    Semantics,
    elem_of_value,
)
from .syntax import (
    Arrow,
    Clauses,
    Fix,
    Fold,
    FVar,
    InL,
    InR,
    IsoT,
    LaterT,
    Later,
    Mu,
    Next,
    One,
    Pair,
    Prod,
    Sum,
    TermExpr,
    TVar,
    TypeExpr,
    Unit,
    Var,
    Zero,
    desugar,
    parse_program,
    parse_type,
    pretty,
)
from .typecheck import CheckedProgram, check_program, unfold

SUITES = (
    "naturality",
    "restrict-hom",
    "dagger-epi",
    "later-distrib",
    "next-coherence",
    "niso",
    "daggerable",
    "join-laws",
    "fix-placeholder",
    "fix-iterate",
    "stabilization",
    "substitution",
    "agreement",
)

DEMOS = ("flip", "map", "nats", "qctrl", "rot", "qft")


@dataclass(frozen=True)
class Check:
    suite: str
    subject: str
    ok: bool
    detail: str = ""


@dataclass
class Corpus:
    """Closed types and checked programs that the suites range over."""

    types: list[tuple[str, TypeExpr]] = field(default_factory=list)
    programs: list[tuple[str, CheckedProgram]] = field(default_factory=list)


# ------------------------------------------------------------------ corpus


def demo_source(name: str) -> str:
    return resources.files("gpm").joinpath("demos", f"{name}.gpm").read_text(encoding="utf-8")


def load_demo(name: str) -> CheckedProgram:
    cp = check_program(desugar(parse_program(demo_source(name))))
    if cp.diagnostics:
        raise GpmError(f"demo {name} does not check: {cp.diagnostics}")
    return cp


BASE_TYPES = {
    "nat": "mu X . 1 + @X",
    "bits": "mu X . 1 + (1 + 1) * @X",
    "steps": "mu X . 1 + @(1 + X)",
    "stream": "mu X . (1 + 1) * @X",
    "later-bool": "@(1 + 1)",
}


def demo_corpus() -> Corpus:
    c = Corpus()
    for name, src in BASE_TYPES.items():
        c.types.append((name, parse_type(src)))
    for name in DEMOS:
        cp = load_demo(name)
        c.programs.append((name, cp))
        for tname, ty in cp.aliases.items():
            c.types.append((f"{name}.{tname}", ty))
    return c


# ------------------------------------------------------- random generation


class TypeGen:
    """Closed guarded types of bounded depth; bound variables only appear under ``@``."""

    def __init__(self, rng: random.Random, max_depth: int = 4):
        self.rng = rng
        self.max_depth = max_depth
        self.counter = 0

    def fresh(self) -> str:
        self.counter += 1
        return f"X{self.counter}"

    def gen(self, depth: int | None = None, usable: tuple[str, ...] = (), pending: tuple[str, ...] = ()) -> TypeExpr:
        depth = self.max_depth if depth is None else depth
        r = self.rng
        leaves = ["one", "bool", "bool", "zero"] + ["var"] * (2 * len(usable))
        if depth <= 0:
            kind = r.choice(leaves)
        else:
            kind = r.choice(leaves + ["sum", "sum", "prod", "later", "later", "mu", "mu"])
        match kind:
            case "one":
                return One()
            case "bool":
                return Sum(One(), One())
            case "zero":
                return Zero()
            case "var":
                return TVar(r.choice(usable))
            case "sum":
                return Sum(self.gen(depth - 1, usable, pending), self.gen(depth - 1, usable, pending))
            case "prod":
                return Prod(self.gen(depth - 1, usable, pending), self.gen(depth - 1, usable, pending))
            case "later":
                return Later(self.gen(depth - 1, usable + pending, ()))
            case "mu":
                v = self.fresh()
                # a typical recursive shape: a base case plus a delayed recursive position
                base = self.gen(depth - 2, usable, pending + (v,)) if depth >= 2 else One()
                step = Later(TVar(v))
                if r.random() < 0.3:
                    step = Later(Sum(TVar(v), self.gen(depth - 3, usable + pending + (v,), ())))
                if r.random() < 0.5:
                    body = Sum(base, Prod(self.gen(max(depth - 3, 0), usable, pending + (v,)), step))
                else:
                    body = Sum(base, step)
                return Mu(v, body)
        raise AssertionError(kind)


def random_types(seed: int, count: int, max_depth: int = 4, stage: int = 6, max_dim: int = 256) -> list[TypeExpr]:
    """Seeded closed guarded types whose stage objects stay small."""
    rng = random.Random(seed)
    gen = TypeGen(rng, max_depth)
    out: list[TypeExpr] = []
    session = GuardedSession(PInjBackend())
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 200 * count:
            raise RuntimeError("random type generation did not converge")
        t = gen.gen()
        try:
            d = dim(session.denote_type(t).stage(stage))
        except RecursionError:
            continue
        if 1 <= d <= max_dim and t not in out:
            out.append(t)
    return out


class _Names:
    def __init__(self):
        self.k = 0

    def __call__(self) -> str:
        self.k += 1
        return f"v{self.k}"


def expand(ty: TypeExpr, rng: random.Random, budget: int, names: _Names, latency: int = 0):
    """A complete, pairwise orthogonal family of patterns for ``ty``.

    Returns ``(pattern, signature)`` pairs; a signature lists each variable's
    type and latency in order of occurrence.
    """
    def leaf():
        n = names()
        return [(Var(n), ((n, ty, latency),))]

    if budget <= 0 or rng.random() < 0.25:
        return leaf()
    match ty:
        case One():
            return [(Unit(), ())]
        case Sum(a, b):
            return [(InL(p), s) for p, s in expand(a, rng, budget - 1, names, latency)] + [
                (InR(p), s) for p, s in expand(b, rng, budget - 1, names, latency)
            ]
        case Prod(a, b):
            left = expand(a, rng, budget - 1, names, latency)
            out = []
            for p, s in left:
                for q, u in expand(b, rng, budget - 1, names, latency):
                    out.append((Pair(p, q), s + u))
            return out
        case Mu():
            return [(Fold(p), s) for p, s in expand(unfold(ty), rng, budget - 1, names, latency)]
        case Later(b):
            return [(Next(p), s) for p, s in expand(b, rng, budget - 1, names, latency + 1)]
    return leaf()


def _rename(t: TermExpr, ren: dict[str, str]) -> TermExpr:
    match t:
        case Var(n):
            return Var(ren[n])
        case Unit():
            return t
        case InL(b):
            return InL(_rename(b, ren))
        case InR(b):
            return InR(_rename(b, ren))
        case Fold(b):
            return Fold(_rename(b, ren))
        case Next(b):
            return Next(_rename(b, ren))
        case Pair(a, b):
            return Pair(_rename(a, ren), _rename(b, ren))
    raise TypeError(t)


def permutation_iso(ty: TypeExpr, rng: random.Random, budget: int = 4) -> Clauses | None:
    """Clauses pairing the patterns of one expansion up to a random permutation.

    Patterns are only exchanged when their variables agree in type and latency.
    """
    from .typecheck import _nameless

    family = expand(ty, rng, budget, _Names())
    if not family or len(family) > 24:
        return None
    groups: dict[tuple, list[int]] = {}
    for i, (_, sig) in enumerate(family):
        key = tuple((_nameless(t), lat) for _, t, lat in sig)
        groups.setdefault(key, []).append(i)
    target = list(range(len(family)))
    for idx in groups.values():
        shuffled = idx[:]
        rng.shuffle(shuffled)
        for a, b in zip(idx, shuffled):
            target[a] = b
    clauses = []
    for i, (p, sig) in enumerate(family):
        q, qsig = family[target[i]]
        ren = {qv: pv for (qv, _, _), (pv, _, _) in zip(qsig, sig)}
        clauses.append((p, _rename(q, ren)))
    return Clauses(tuple(clauses))


def random_programs(seed: int, count: int, types: list[TypeExpr] | None = None) -> list[tuple[str, CheckedProgram]]:
    """Seeded checked programs: permutation isos, plus recursive maps over lists of them."""
    rng = random.Random(seed)
    pool = types if types is not None else random_types(seed, max(count, 8), max_depth=3, stage=4, max_dim=64)
    out: list[tuple[str, CheckedProgram]] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 100 * count:
            raise RuntimeError("random iso generation did not converge")
        ty = rng.choice(pool)
        w = permutation_iso(ty, rng)
        if w is None:
            continue
        name = f"rand{len(out)}"
        a = pretty(ty)
        decls = [f"type A = {a};", f"iso w : A <-> A = {pretty(w)};"]
        if len(out) % 2 == 1:
            decls += [
                "type LA = mu Y . 1 + A * @Y;",
                "iso mapw : LA <-> LA = fix f : @(LA <-> LA) . "
                "{ fold (inl ()) <-> fold (inl ()) | fold (inr (h, t)) <-> fold (inr (w h, f @@ t)) };",
                "iso mapf : (A <-> A) -> (LA <-> LA) = fix g : @((A <-> A) -> (LA <-> LA)) . \\p : A <-> A . "
                "{ fold (inl ()) <-> fold (inl ()) | fold (inr (h, t)) <-> fold (inr (p h, (g @@ next p) @@ t)) };",
                "iso mapped : LA <-> LA = mapf w;",
            ]
        src = "\n".join(decls)
        try:
            cp = check_program(desugar(parse_program(src)))
        except GpmError:
            continue
        if cp.diagnostics:
            continue
        # small stage objects keep the whole suite fast
        session = GuardedSession(PInjBackend())
        if any(dim(session.denote_type(t).stage(4)) > 128 for t in cp.aliases.values()):
            continue
        out.append((name, cp))
    return out


# -------------------------------------------------------------- backends


def uses_quantum(cp: CheckedProgram, name: str) -> bool:
    seen: set[str] = set()

    def walk(w) -> bool:
        match w:
            case FVar(n):
                if n in ("had", "half"):
                    return True
                if n in cp.isos and n not in seen:
                    seen.add(n)
                    return walk(cp.isos[n])
                return False
        return any(walk(c) for c in _children(w))

    return walk(cp.isos[name])


def _children(node) -> Iterator:
    from dataclasses import fields, is_dataclass

    if isinstance(node, tuple):
        for x in node:
            yield from _children(x) if isinstance(x, tuple) else (x,)
        return
    if is_dataclass(node):
        for f in fields(node):
            v = getattr(node, f.name)
            if isinstance(v, tuple):
                yield from _children(v)
            elif is_dataclass(v):
                yield v


def backend_for(cp: CheckedProgram, name: str):
    return HilbBackend() if uses_quantum(cp, name) else PInjBackend()


def first_order_isos(cp: CheckedProgram) -> list[str]:
    return [n for n, t in cp.iso_types.items() if isinstance(t, IsoT)]


# ------------------------------------------------------------ type suites


def _type_checks(corpus: Corpus, N: int) -> Iterator[Check]:
    pinj = GuardedSession(PInjBackend())
    for name, ty in corpus.types:
        c = pinj.denote_type(ty)
        yield Check("dagger-epi", name, restrictions_dagger_epi(c, N))
        for label, f in (("id", identity_mor(c)), ("next", next_mor(c)), ("bang", bang_mor(c, pinj.zero))):
            bad = naturality_failure(f, N)
            yield Check("naturality", f"{label} {name}", bad is None, "" if bad is None else f"stage {bad}")
        if isinstance(ty, Mu):
            f = pinj.fold_iso(ty)
            bad = naturality_failure(f, N)
            yield Check("naturality", f"fold {name}", bad is None, "" if bad is None else f"stage {bad}")
            yield Check("daggerable", f"fold {name}", daggerability_failure(f, N) is None)
            ok = all(shapes_stable(pinj, ty, j) for j in range(N + 1))
            yield Check("stabilization", name, ok)
            sub = pinj.unfold_type_cochain(ty)
            inner = pinj.denote_type(ty.body, {ty.var: pinj.denote_type(ty)})
            yield Check(
                "substitution", name, all(sub.stage(n) == inner.stage(n) for n in range(N + 1))
            )
        conj = conjugate_by_next(identity_mor(c))
        yield Check("naturality", f"@id {name}", naturality_failure(conj, N) is None)
    # distribution of later over sums and products, one pair of corpus types at a time
    b = pinj.backend
    types = [pinj.denote_type(t) for _, t in corpus.types]
    for i in range(len(types)):
        x, y = types[i], types[(i + 1) % len(types)]
        label = f"{corpus.types[i][0]} / {corpus.types[(i + 1) % len(types)][0]}"
        yield Check("later-distrib", label, _later_distrib(b, x, y, N))
        yield Check("next-coherence", label, _next_injection(b, x, y, N))


def _later_distrib(b, x: Cochain, y: Cochain, N: int) -> bool:
    for combine, shape_op, unitor in (
        (sum_cochain, SumO, ("unitlSum", O)),
        (prod_cochain, ProdO, ("annihL", O)),
    ):
        whole = later(combine(x, y))
        parts = combine(later(x), later(y))
        for n in range(1, N + 1):
            if whole.stage(n) != parts.stage(n):
                return False
            if n < N and not b.eq(whole.restriction(n), parts.restriction(n)):
                return False
        # stage 0: O against O ⊕ O or O ⊗ O, related by the unitor / annihilator
        if parts.stage(0) != shape_op(O, O) or whole.stage(0) != O:
            return False
        u = b.coherence(unitor[0], O)
        if not b.eq(b.compose(u, parts.restriction(0)), whole.restriction(0)):
            return False
    return True


def _next_injection(b, x: Cochain, y: Cochain, N: int) -> bool:
    s = sum_cochain(x, y)
    nu_s = next_mor(s)
    nu_x = next_mor(x)
    for n in range(N + 1):
        lhs = b.compose(nu_s.at(n), b.inj1(x.stage(n), y.stage(n)))
        if n == 0:
            ly0 = later(y).stage(0)
            inj = b.inj1(later(x).stage(0), ly0)
            rhs = b.compose_all(b.coherence("unitlSum", O), inj, nu_x.at(0))
        else:
            rhs = b.compose(b.inj1(x.stage(n - 1), y.stage(n - 1)), nu_x.at(n))
        if not b.eq(lhs, rhs):
            return False
    return True


def _niso_checks(N: int) -> Iterator[Check]:
    session = GuardedSession(PInjBackend())
    for label, src in (("bits", "mu X . 1 + (1 + 1) * @X"), ("nat", "mu X . 1 + @X")):
        mu = parse_type(src)
        approx = session.approximants(mu, {})
        f = bang_mor(approx(1), session.zero)
        for k in range(3):
            # f : C_{k+1} -> C_k is a k-iso; the functor makes it a (k+1)-iso
            g = session.act(mu.body, {}, {mu.var: f})
            ok = is_n_iso(f, k) and is_n_iso(g, k + 1) and naturality_failure(g, N) is None
            yield Check("niso", f"{label} F^{k}(!)", ok)
            f = g
    # a hand-made n-iso on the naturals: keep the values below n
    nat = parse_type("mu X . 1 + @X")
    c = session.denote_type(nat)
    for n in range(3):
        f = _truncation(session, nat, c, n)
        g = session.act(nat.body, {}, {nat.var: f})
        ok = (
            naturality_failure(f, N) is None
            and is_n_iso(f, n)
            and not is_n_iso(f, n + 1)
            and is_n_iso(g, n + 1)
        )
        yield Check("niso", f"nat below {n}", ok)


def nat_value(k: int):
    v = VFold(VInl(UNIT))
    for _ in range(k):
        v = VFold(VInr(VNext(v)))
    return v


def _truncation(session: GuardedSession, nat: Mu, c: Cochain, n: int) -> StagedMor:
    b = session.backend

    def comp(m: int):
        keep = {elem_of_value(nat_value(k), nat, m) for k in range(min(n, m + 1))}
        return b.lift(c.stage(m), c.stage(m), {e: e for e in keep})

    return StagedMor(c, c, comp, f"below {n}")


# ------------------------------------------------------------- iso suites


def junk_placeholder(backend, shape_of, seed: int = 7):
    """A placeholder that is arbitrary but well-shaped."""
    rng = np.random.default_rng(seed)

    def make(ty):
        match ty:
            case IsoT(a, bt):
                def comp(n):
                    s, d = shape_of(a, n), shape_of(bt, n)
                    if isinstance(backend, HilbBackend):
                        return CMatrix(s, d, rng.normal(size=(dim(d), dim(s))) + 1j * rng.normal(size=(dim(d), dim(s))))
                    src, dst = enumerate_elems(s), enumerate_elems(d)
                    k = min(len(src), len(dst))
                    return PInjMor(s, d, {src[i]: dst[k - 1 - i] for i in range(k)})

                return IsoVal(ty, comp, "junk")
            case LaterT(body):
                return LaterVal(ty, lambda: make(body))
            case Arrow(_, res):
                return FunVal(ty, lambda _a: make(res))
        raise TypeError(ty)

    return make


def raising_placeholder(ty):
    def boom(*_a):
        raise AssertionError("the fix placeholder was reached")

    match ty:
        case IsoT():
            return IsoVal(ty, boom, "raise")
        case LaterT():
            return LaterVal(ty, boom)
        case Arrow():
            return FunVal(ty, boom)
    raise TypeError(ty)


def _mentions_fix(w) -> bool:
    if isinstance(w, Fix):
        return True
    return any(_mentions_fix(c) for c in _children(w))


def _iso_checks(name: str, cp: CheckedProgram, N: int) -> Iterator[Check]:
    for iso in first_order_isos(cp):
        subject = f"{name}.{iso}"
        backend = backend_for(cp, iso)
        sem = Semantics(backend, cp)
        v = sem.iso(iso)
        f = sem.staged(v)
        b = backend
        bad = naturality_failure(f, N)
        yield Check("naturality", subject, bad is None, "" if bad is None else f"stage {bad}")
        ok = all(b.eq(restrict_hom(f.at(n + 1), f.src, f.dst, n), f.at(n)) for n in range(N))
        yield Check("restrict-hom", subject, ok)
        bad = daggerability_failure(f, N)
        yield Check("daggerable", subject, bad is None, "" if bad is None else f"stage {bad}")
        body = cp.isos[iso]
        if isinstance(body, Clauses) and len(body.clauses) >= 2:
            yield Check("join-laws", subject, _join_laws(sem, body, N))
        if _mentions_fix(body) or any(_mentions_fix(cp.isos[d]) for d in _deps(cp, iso)):
            yield Check("fix-placeholder", subject, _placeholder_independent(cp, iso, backend, N))
        if isinstance(body, Fix) and isinstance(body.ty.body, IsoT):
            ok = all(b.eq(sem.fix_iterate(body, n), f.at(n)) for n in range(N + 1))
            yield Check("fix-iterate", subject, ok)


def _deps(cp: CheckedProgram, name: str) -> set[str]:
    seen: set[str] = set()
    stack = [cp.isos[name]]
    while stack:
        w = stack.pop()
        if isinstance(w, FVar) and w.name in cp.isos and w.name not in seen:
            seen.add(w.name)
            stack.append(cp.isos[w.name])
        stack.extend(_children(w))
    return seen


def _join_laws(sem: Semantics, w: Clauses, N: int) -> bool:
    b = sem.backend
    ann = w.ann
    for n in range(N + 1):
        parts = [sem.denote_clause(l, r, ann.dom, ann.cod, n, sem.env) for l, r in w.clauses]
        f, g = parts[0], b.join_all(b.src(parts[0]), b.dst(parts[0]), parts[1:])
        fg = b.join(f, g)
        if not b.eq(b.dagger(fg), b.join(b.dagger(f), b.dagger(g))):
            return False
        h = b.dagger(fg)  # cod -> dom
        if not b.eq(b.compose(h, fg), b.join(b.compose(h, f), b.compose(h, g))):
            return False
        if not b.eq(b.compose(fg, h), b.join(b.compose(f, h), b.compose(g, h))):
            return False
    return True


def _placeholder_independent(cp: CheckedProgram, iso: str, backend, N: int) -> bool:
    ref = Semantics(backend, cp)
    junk_sem = Semantics(backend, cp)
    junk_sem._placeholder = junk_placeholder(backend, junk_sem.shape_of)
    raise_sem = Semantics(backend, cp, placeholder=raising_placeholder)
    for n in range(N + 1):
        base = ref.denote_iso(iso, n)
        if not backend.eq(base, junk_sem.denote_iso(iso, n)):
            return False
        try:
            other = raise_sem.denote_iso(iso, n)
        except AssertionError:
            return False
        if not backend.eq(base, other):
            return False
    return True


# ------------------------------------------------------------ agreement


def bool_lists(max_len: int):
    for k in range(max_len + 1):
        for bits in range(2 ** k):
            yield [(bits >> (k - 1 - i)) & 1 for i in range(k)]


def list_value(items) -> object:
    v = VFold(VInl(UNIT))
    for x in reversed(list(items)):
        v = VFold(VInr(VPair(x, VNext(v))))
    return v


def bit(b: int):
    return VInr(UNIT) if b else VInl(UNIT)


def agree_on(sem: Semantics, ev: Evaluator, iso: str, arg, n: int) -> tuple[bool, str]:
    """Compare ``denote(iso, n)`` applied to the point of ``arg`` with evaluation."""
    b = sem.backend
    ty = sem.iso(iso).ty
    f = sem.denote_iso(iso, n)
    if not defined_at(force(arg, n), n):
        return True, "argument too deep"
    den = b.compose(f, sem.point(arg, ty.dom, n))
    out = ev.apply_named(iso, arg, n)
    if defined_at(out, n):
        want = sem.point(out, ty.cod, n)
    else:
        want = b.zero_mor(b.src(den), b.dst(den))
    if b.eq(den, want):
        return True, ""
    return False, f"stage {n}: denotation {b.to_json(den)} vs evaluation {b.to_json(want)}"


def _agreement_checks(N: int) -> Iterator[Check]:
    for demo, isos in (("flip", ("flip",)), ("map", ("mapnot",))):
        cp = load_demo(demo)
        sem = Semantics(PInjBackend(), cp)
        ev = Evaluator(cp)
        for iso in isos:
            bad = None
            for n in range(N + 1):
                for bits in bool_lists(min(n, 4)):
                    ok, why = agree_on(sem, ev, iso, list_value(bit(x) for x in bits), n)
                    if not ok:
                        bad = why
                        break
                if bad:
                    break
            yield Check("agreement", f"{demo}.{iso}", bad is None, bad or "")


# ------------------------------------------------------------------ runner


def run_suites(suites: Iterable[str] | None = None, N: int = 6, seed: int = 0,
               random_count: int = 50, corpus: Corpus | None = None) -> list[Check]:
    """Run the requested suites (all by default) in a fixed order."""
    wanted = list(SUITES if suites is None else suites)
    for s in wanted:
        if s not in SUITES:
            raise ValueError(f"unknown suite {s!r}; choose from {', '.join(SUITES)}")
    corpus = corpus or demo_corpus()
    rtypes = random_types(seed, random_count // 2)
    progs = list(corpus.programs) + random_programs(seed, random_count - random_count // 2)
    full = Corpus(list(corpus.types) + [(f"random{i}", t) for i, t in enumerate(rtypes)], progs)
    for name, cp in progs:
        for tname, ty in cp.aliases.items():
            if name.startswith("rand"):
                full.types.append((f"{name}.{tname}", ty))
    out: list[Check] = []
    type_suites = {"naturality", "dagger-epi", "later-distrib", "next-coherence", "stabilization", "substitution", "daggerable"}
    if type_suites & set(wanted):
        out.extend(_type_checks(full, N))
    if "niso" in wanted:
        out.extend(_niso_checks(N))
    iso_suites = {"naturality", "restrict-hom", "daggerable", "join-laws", "fix-placeholder", "fix-iterate"}
    if iso_suites & set(wanted):
        for name, cp in progs:
            out.extend(_iso_checks(name, cp, N))
    if "agreement" in wanted:
        out.extend(_agreement_checks(min(N, 4)))
    return [c for c in out if c.suite in wanted]


def summarize(checks: list[Check]) -> dict[str, dict[str, int]]:
    table: dict[str, dict[str, int]] = {}
    for c in checks:
        row = table.setdefault(c.suite, {"pass": 0, "fail": 0})
        row["pass" if c.ok else "fail"] += 1
    return {k: table[k] for k in SUITES if k in table}
