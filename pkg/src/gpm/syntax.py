"""Abstract syntax, lexer, parser, desugaring and pretty-printer for ``.gpm`` programs.

Concrete syntax in brief::

    type Nat = mu X . 1 + @X;
    iso not : 1 + 1 <-> 1 + 1 = { '0 <-> '1 | '1 <-> '0 };
    term two : Nat = fold (inr (next (fold (inr (next (fold (inl ())))))));

``@`` is the later modality on types, ``@@`` delayed application, ``\\f : T .``
an iso abstraction, ``<<`` (or ``∘``) iso composition, and ``--`` starts a
comment.  An identifier in expression position is an iso when an iso of that
name is in scope (a declaration, a binder, or a primitive) and a term
variable otherwise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields, is_dataclass, replace
from typing import Union

Pos = tuple[int, int]

PRIMITIVE_ISOS = ("had", "half")
KEYWORDS = {"type", "iso", "term", "mu", "let", "in", "inl", "inr", "fold", "next", "fix"}


def _pos():
    return field(default=None, compare=False, repr=False)


# ------------------------------------------------------------------ types


class TypeExpr:
    __slots__ = ()


@dataclass(frozen=True)
class Zero(TypeExpr):
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class One(TypeExpr):
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Sum(TypeExpr):
    left: TypeExpr
    right: TypeExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Prod(TypeExpr):
    left: TypeExpr
    right: TypeExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Later(TypeExpr):
    body: TypeExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Mu(TypeExpr):
    var: str
    body: TypeExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class TVar(TypeExpr):
    name: str
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Named(TypeExpr):
    name: str
    pos: Pos | None = _pos()


class FunTypeExpr:
    __slots__ = ()


@dataclass(frozen=True)
class IsoT(FunTypeExpr):
    dom: TypeExpr
    cod: TypeExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class LaterT(FunTypeExpr):
    body: FunTypeExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Arrow(FunTypeExpr):
    arg: FunTypeExpr
    res: FunTypeExpr
    pos: Pos | None = _pos()


# ------------------------------------------------------------------ terms


class TermExpr:
    __slots__ = ()


@dataclass(frozen=True)
class Unit(TermExpr):
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class InL(TermExpr):
    body: TermExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class InR(TermExpr):
    body: TermExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Pair(TermExpr):
    left: TermExpr
    right: TermExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class LetPair(TermExpr):
    x: str
    y: str
    bound: TermExpr
    body: TermExpr
    pos: Pos | None = _pos()
    # type of ``bound``, filled in by the typechecker
    ann: TypeExpr | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Fold(TermExpr):
    body: TermExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Next(TermExpr):
    body: TermExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Var(TermExpr):
    name: str
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class App(TermExpr):
    iso: "IsoExpr"
    arg: TermExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class DelayedApp(TermExpr):
    iso: "IsoExpr"
    arg: TermExpr
    pos: Pos | None = _pos()


# sugar, removed by desugar()
@dataclass(frozen=True)
class Nil(TermExpr):
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Cons(TermExpr):
    head: TermExpr
    tail: TermExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class BitLit(TermExpr):
    bit: int
    pos: Pos | None = _pos()


# ------------------------------------------------------------------- isos


class IsoExpr:
    __slots__ = ()


@dataclass(frozen=True)
class Clauses(IsoExpr):
    clauses: tuple[tuple[TermExpr, TermExpr], ...]
    pos: Pos | None = _pos()
    # domain, codomain and exhaustivity flags, filled in by the typechecker
    ann: "ClauseAnn | None" = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FVar(IsoExpr):
    name: str
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Lambda(IsoExpr):
    var: str
    ty: FunTypeExpr
    body: IsoExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class AppIso(IsoExpr):
    fun: IsoExpr
    arg: IsoExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Fix(IsoExpr):
    var: str
    ty: FunTypeExpr
    body: IsoExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class NextIso(IsoExpr):
    body: IsoExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class DelayedAppIso(IsoExpr):
    fun: IsoExpr
    arg: IsoExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Compose(IsoExpr):
    """``f << g``: apply ``g`` then ``f``; sugar for ``{ x <-> f (g x) }``."""

    outer: IsoExpr
    inner: IsoExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class ClauseAnn:
    dom: TypeExpr
    cod: TypeExpr
    lhs_exhaustive: bool
    rhs_exhaustive: bool


# ----------------------------------------------------------- declarations


@dataclass(frozen=True)
class TypeDecl:
    name: str
    ty: TypeExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class IsoDecl:
    name: str
    ty: FunTypeExpr
    body: IsoExpr
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class TermDecl:
    name: str
    ty: TypeExpr
    body: TermExpr
    pos: Pos | None = _pos()


Decl = Union[TypeDecl, IsoDecl, TermDecl]


@dataclass(frozen=True)
class Program:
    decls: tuple[Decl, ...]

    def lookup(self, name: str) -> Decl:
        for d in self.decls:
            if d.name == name:
                return d
        raise KeyError(name)


# ------------------------------------------------------------------ lexer


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected=()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        exp = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{exp}")


@dataclass(frozen=True)
class Token:
    kind: str  # 'name', 'sym', 'eof'
    text: str
    line: int
    col: int


_SYMBOLS = [
    "<->", "::", "@@", "->", "<<", "'0", "'1",
    "@", "(", ")", "{", "}", "[", "]", "|", ",", ";", ":", "=", ".", "\\",
    "+", "*", "0", "1", "2", "∘",
]
_NAME_RE = re.compile(r"[^\W\d]\w*'*", re.UNICODE)


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        m = _NAME_RE.match(text, i)
        if m:
            toks.append(Token("name", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Token("sym", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "<eof>", line, col))
    return toks


# ----------------------------------------------------------------- parser


class _Parser:
    def __init__(self, text: str, isos=(), types=()):
        self.toks = tokenize(text)
        self.i = 0
        self.iso_scope: list[set[str]] = [set(PRIMITIVE_ISOS) | set(isos)]
        self.type_names: set[str] = set(types)
        self.mu_scope: list[str] = []
        self.furthest = (0, set())

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and (t.kind == "sym" or text in KEYWORDS)

    def note(self, *expected: str) -> None:
        if self.i > self.furthest[0]:
            self.furthest = (self.i, set(expected))
        elif self.i == self.furthest[0]:
            self.furthest[1].update(expected)

    def fail(self, message: str, *expected: str):
        self.note(*expected)
        t = self.tok
        exp = self.furthest[1] if self.furthest[0] == self.i else set(expected)
        raise ParseError(message, t.line, t.col, exp)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.tok.text!r}", repr(text))
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        self.note(repr(text))
        return False

    def name(self) -> Token:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            self.fail(f"expected a name, found {t.text!r}", "NAME")
        self.i += 1
        return t

    def is_iso_name(self, name: str) -> bool:
        return any(name in scope for scope in self.iso_scope)

    def attempt(self, fn):
        """Run ``fn``; on failure rewind and return ``None``."""
        save = self.i
        try:
            return fn()
        except ParseError:
            self.i = save
            return None

    # program
    def program(self) -> Program:
        decls = []
        seen: set[str] = set()
        while self.tok.kind != "eof":
            d = self.decl()
            if d.name in seen:
                raise ParseError(f"duplicate declaration {d.name!r}", *d.pos)
            seen.add(d.name)
            decls.append(d)
        return Program(tuple(decls))

    def decl(self) -> Decl:
        t = self.tok
        pos = (t.line, t.col)
        if self.accept("type"):
            name = self.name().text
            self.expect("=")
            ty = self.type_()
            self.expect(";")
            self.type_names.add(name)
            return TypeDecl(name, ty, pos)
        if self.accept("iso"):
            name = self.name().text
            self.expect(":")
            ty = self.funty()
            self.expect("=")
            body = self.iso_expr()
            self.expect(";")
            self.iso_scope[0].add(name)
            return IsoDecl(name, ty, body, pos)
        if self.accept("term"):
            name = self.name().text
            self.expect(":")
            ty = self.type_()
            self.expect("=")
            body = self.term_expr()
            self.expect(";")
            return TermDecl(name, ty, body, pos)
        self.fail(f"expected a declaration, found {t.text!r}", "'type'", "'iso'", "'term'")

    # types
    def type_(self) -> TypeExpr:
        t = self.tok
        if self.accept("mu"):
            var = self.name().text
            self.expect(".")
            self.mu_scope.append(var)
            try:
                body = self.type_()
            finally:
                self.mu_scope.pop()
            return Mu(var, body, (t.line, t.col))
        left = self.type_prod()
        while self.at("+"):
            p = self.tok
            self.i += 1
            left = Sum(left, self.type_prod(), (p.line, p.col))
        return left

    def type_prod(self) -> TypeExpr:
        left = self.type_later()
        while self.at("*"):
            p = self.tok
            self.i += 1
            left = Prod(left, self.type_later(), (p.line, p.col))
        return left

    def type_later(self) -> TypeExpr:
        t = self.tok
        if self.accept("@"):
            return Later(self.type_later(), (t.line, t.col))
        if self.accept("@@"):
            return Later(Later(self.type_later(), (t.line, t.col + 1)), (t.line, t.col))
        return self.type_atom()

    def type_atom(self) -> TypeExpr:
        t = self.tok
        pos = (t.line, t.col)
        if self.accept("0"):
            return Zero(pos)
        if self.accept("1"):
            return One(pos)
        if self.accept("2"):
            # bit type sugar
            return Sum(One(pos), One(pos), pos)
        if self.accept("("):
            ty = self.type_()
            self.expect(")")
            return ty
        if t.kind == "name" and t.text not in KEYWORDS:
            self.i += 1
            if t.text in self.mu_scope or t.text not in self.type_names:
                return TVar(t.text, pos)
            return Named(t.text, pos)
        self.fail(f"expected a type, found {t.text!r}", "'0'", "'1'", "'2'", "'('", "'@'", "'mu'", "NAME")

    def funty(self) -> FunTypeExpr:
        t = self.tok
        left = self.funty_atom()
        if self.accept("->"):
            return Arrow(left, self.funty(), (t.line, t.col))
        return left

    def funty_atom(self) -> FunTypeExpr:
        t = self.tok
        pos = (t.line, t.col)

        def iso_type():
            a = self.type_()
            self.expect("<->")
            return IsoT(a, self.type_(), pos)

        got = self.attempt(iso_type)
        if got is not None:
            return got
        if self.accept("@"):
            return LaterT(self.funty_atom(), pos)
        if self.accept("@@"):
            return LaterT(LaterT(self.funty_atom(), (t.line, t.col + 1)), pos)
        if self.accept("("):
            inner = self.funty()
            self.expect(")")
            return inner
        self.fail(f"expected a function type, found {t.text!r}", "'<->'", "'@'", "'('")

    # expressions (terms and isos share one grammar; kinds are resolved here)
    def term_expr(self) -> TermExpr:
        t = self.tok
        e = self.expr()
        if not isinstance(e, TermExpr):
            raise ParseError("expected a term, found an iso", t.line, t.col, ("term",))
        return e

    def iso_expr(self) -> IsoExpr:
        t = self.tok
        e = self.expr()
        if not isinstance(e, IsoExpr):
            raise ParseError("expected an iso, found a term", t.line, t.col, ("iso",))
        return e

    def expr(self):
        t = self.tok
        pos = (t.line, t.col)
        if self.accept("let"):
            self.expect("(")
            x = self.name().text
            self.expect(",")
            y = self.name().text
            self.expect(")")
            self.expect("=")
            bound = self.term_expr()
            self.expect("in")
            body = self.term_expr()
            for v in (x, y):
                if self.is_iso_name(v):
                    raise ParseError(f"{v!r} names an iso and cannot be bound as a variable", *pos)
            return LetPair(x, y, bound, body, pos)
        for kw, ctor in (("\\", Lambda), ("fix", Fix)):
            if self.accept(kw):
                var = self.name().text
                self.expect(":")
                ty = self.funty()
                self.expect(".")
                self.iso_scope.append({var})
                try:
                    body = self.iso_expr()
                finally:
                    self.iso_scope.pop()
                return ctor(var, ty, body, pos)
        return self.cons()

    def cons(self):
        t = self.tok
        head = self.compose()
        if self.accept("::"):
            tail = self.cons()
            if not isinstance(head, TermExpr) or not isinstance(tail, TermExpr):
                raise ParseError("'::' joins two terms", t.line, t.col, ("term",))
            return Cons(head, tail, (t.line, t.col))
        return head

    def compose(self):
        t = self.tok
        left = self.dapp()
        while self.at("<<") or self.at("∘"):
            self.i += 1
            right = self.dapp()
            if not isinstance(left, IsoExpr) or not isinstance(right, IsoExpr):
                raise ParseError("composition joins two isos", t.line, t.col, ("iso",))
            left = Compose(left, right, (t.line, t.col))
        return left

    def dapp(self):
        t = self.tok
        left = self.unary()
        while self.at("@@"):
            self.i += 1
            right = self.unary()
            if not isinstance(left, IsoExpr):
                raise ParseError("left of '@@' must be an iso", t.line, t.col, ("iso",))
            ctor = DelayedApp if isinstance(right, TermExpr) else DelayedAppIso
            left = ctor(left, right, (t.line, t.col))
        return left

    def unary(self):
        t = self.tok
        pos = (t.line, t.col)
        for kw, ctor in (("inl", InL), ("inr", InR), ("fold", Fold)):
            if self.accept(kw):
                body = self.unary()
                if not isinstance(body, TermExpr):
                    raise ParseError(f"'{kw}' expects a term", *pos, ("term",))
                return ctor(body, pos)
        if self.accept("next"):
            body = self.unary()
            return Next(body, pos) if isinstance(body, TermExpr) else NextIso(body, pos)
        return self.app()

    def app(self):
        t = self.tok
        head = self.atom()
        while self.starts_atom():
            if not isinstance(head, IsoExpr):
                raise ParseError("only an iso can be applied", t.line, t.col, ("iso",))
            arg = self.atom()
            head = (App if isinstance(arg, TermExpr) else AppIso)(head, arg, (t.line, t.col))
        return head

    def starts_atom(self) -> bool:
        t = self.tok
        if t.kind == "name":
            return t.text not in KEYWORDS
        return t.kind == "sym" and t.text in {"(", "[", "'0", "'1", "{"}

    def atom(self):
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "name" and t.text not in KEYWORDS:
            self.i += 1
            return FVar(t.text, pos) if self.is_iso_name(t.text) else Var(t.text, pos)
        if self.accept("'0"):
            return BitLit(0, pos)
        if self.accept("'1"):
            return BitLit(1, pos)
        if self.accept("["):
            self.expect("]")
            return Nil(pos)
        if self.accept("("):
            if self.accept(")"):
                return Unit(pos)
            first = self.expr()
            if self.accept(","):
                second = self.expr()
                self.expect(")")
                if not isinstance(first, TermExpr) or not isinstance(second, TermExpr):
                    raise ParseError("pair components must be terms", *pos, ("term",))
                return Pair(first, second, pos)
            self.expect(")")
            return first
        if self.accept("{"):
            clauses = [self.clause()]
            while self.accept("|"):
                clauses.append(self.clause())
            self.expect("}")
            return Clauses(tuple(clauses), pos)
        self.fail(
            f"expected an expression, found {t.text!r}",
            "NAME", "'('", "'['", "'{'", "'0", "'1",
        )

    def clause(self) -> tuple[TermExpr, TermExpr]:
        lhs = self.term_expr()
        self.expect("<->")
        rhs = self.term_expr()
        return (lhs, rhs)

    def finish(self) -> None:
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r}", "<eof>")


def parse_program(text: str) -> Program:
    """Parse a whole ``.gpm`` source; sugar is kept."""
    p = _Parser(text)
    prog = p.program()
    p.finish()
    return prog


def parse_type(text: str, types=()) -> TypeExpr:
    p = _Parser(text, types=types)
    t = p.type_()
    p.finish()
    return t


def parse_funty(text: str, types=()) -> FunTypeExpr:
    p = _Parser(text, types=types)
    t = p.funty()
    p.finish()
    return t


def parse_term(text: str, isos=(), types=()) -> TermExpr:
    p = _Parser(text, isos=isos, types=types)
    t = p.term_expr()
    p.finish()
    return t


def parse_iso(text: str, isos=(), types=()) -> IsoExpr:
    p = _Parser(text, isos=isos, types=types)
    t = p.iso_expr()
    p.finish()
    return t


# ---------------------------------------------------------------- desugar


def desugar_term(t: TermExpr) -> TermExpr:
    match t:
        case Nil(pos=p):
            return Fold(InL(Unit(p), p), p)
        case Cons(h, tl, pos=p):
            return Fold(InR(Pair(desugar_term(h), desugar_term(tl), p), p), p)
        case BitLit(b, pos=p):
            return (InL if b == 0 else InR)(Unit(p), p)
        case Unit() | Var():
            return t
        case InL(b) | InR(b) | Fold(b) | Next(b):
            return replace(t, body=desugar_term(b))
        case Pair(a, b):
            return replace(t, left=desugar_term(a), right=desugar_term(b))
        case LetPair(bound=b, body=c):
            return replace(t, bound=desugar_term(b), body=desugar_term(c))
        case App(f, a) | DelayedApp(f, a):
            return replace(t, iso=desugar_iso(f), arg=desugar_term(a))
    raise TypeError(f"not a term: {t!r}")


def desugar_iso(w: IsoExpr) -> IsoExpr:
    match w:
        case Compose(f, g, pos=p):
            x = Var("x", p)
            body = App(desugar_iso(f), App(desugar_iso(g), x, p), p)
            return Clauses(((x, body),), p)
        case Clauses(cs):
            return replace(w, clauses=tuple((desugar_term(a), desugar_term(b)) for a, b in cs))
        case FVar():
            return w
        case Lambda(body=b) | Fix(body=b) | NextIso(body=b):
            return replace(w, body=desugar_iso(b))
        case AppIso(f, a) | DelayedAppIso(f, a):
            return replace(w, fun=desugar_iso(f), arg=desugar_iso(a))
    raise TypeError(f"not an iso: {w!r}")


def desugar(p: Program) -> Program:
    out = []
    for d in p.decls:
        match d:
            case IsoDecl():
                out.append(replace(d, body=desugar_iso(d.body)))
            case TermDecl():
                out.append(replace(d, body=desugar_term(d.body)))
            case _:
                out.append(d)
    return Program(tuple(out))


# ----------------------------------------------------------------- pretty

# expression precedence: 0 binder/let, 1 cons, 2 compose, 3 @@, 4 prefix, 5 app, 6 atom


def pretty_type(t: TypeExpr, prec: int = 0) -> str:
    match t:
        case Zero():
            return "0"
        case One():
            return "1"
        case TVar(n) | Named(n):
            return n
        case Later(b):
            inner = pretty_type(b, 3)
            text = "@" + (" " + inner if inner.startswith("@") else inner)
            return f"({text})" if prec > 3 else text
        case Prod(a, b):
            text = f"{pretty_type(a, 2)} * {pretty_type(b, 3)}"
            return f"({text})" if prec > 2 else text
        case Sum(a, b):
            text = f"{pretty_type(a, 1)} + {pretty_type(b, 2)}"
            return f"({text})" if prec > 1 else text
        case Mu(v, b):
            text = f"mu {v} . {pretty_type(b, 0)}"
            return f"({text})" if prec > 0 else text
    raise TypeError(f"not a type: {t!r}")


def pretty_funty(t: FunTypeExpr) -> str:
    match t:
        case IsoT(a, b):
            return f"{pretty_type(a)} <-> {pretty_type(b)}"
        case LaterT(b):
            return f"@({pretty_funty(b)})"
        case Arrow(a, b):
            left = pretty_funty(a)
            if isinstance(a, Arrow):
                left = f"({left})"
            return f"{left} -> {pretty_funty(b)}"
    raise TypeError(f"not a function type: {t!r}")


def _paren(text: str, cond: bool) -> str:
    return f"({text})" if cond else text


def pretty_expr(e, prec: int = 0) -> str:
    match e:
        case Unit():
            return "()"
        case Nil():
            return "[]"
        case BitLit(b):
            return f"'{b}"
        case Var(n) | FVar(n):
            return n
        case Pair(a, b):
            return f"({pretty_expr(a)}, {pretty_expr(b)})"
        case Clauses(cs):
            body = " | ".join(f"{pretty_expr(a)} <-> {pretty_expr(b)}" for a, b in cs)
            return "{ " + body + " }"
        case InL(b) | InR(b) | Fold(b) | Next(b) | NextIso(b):
            kw = {InL: "inl", InR: "inr", Fold: "fold", Next: "next", NextIso: "next"}[type(e)]
            return _paren(f"{kw} {pretty_expr(b, 4)}", prec > 4)
        case App(f, a) | AppIso(f, a):
            return _paren(f"{pretty_expr(f, 5)} {pretty_expr(a, 6)}", prec > 5)
        case DelayedApp(f, a) | DelayedAppIso(f, a):
            return _paren(f"{pretty_expr(f, 3)} @@ {pretty_expr(a, 4)}", prec > 3)
        case Compose(f, g):
            return _paren(f"{pretty_expr(f, 2)} << {pretty_expr(g, 3)}", prec > 2)
        case Cons(h, t):
            return _paren(f"{pretty_expr(h, 2)} :: {pretty_expr(t, 1)}", prec > 1)
        case LetPair(x, y, b, c):
            return _paren(f"let ({x}, {y}) = {pretty_expr(b)} in {pretty_expr(c)}", prec > 0)
        case Lambda(v, ty, b):
            return _paren(f"\\{v} : {pretty_funty(ty)} . {pretty_expr(b)}", prec > 0)
        case Fix(v, ty, b):
            return _paren(f"fix {v} : {pretty_funty(ty)} . {pretty_expr(b)}", prec > 0)
    raise TypeError(f"not an expression: {e!r}")


def pretty_decl(d: Decl) -> str:
    match d:
        case TypeDecl(n, t):
            return f"type {n} = {pretty_type(t)};"
        case IsoDecl(n, t, b):
            return f"iso {n} : {pretty_funty(t)} = {pretty_expr(b)};"
        case TermDecl(n, t, b):
            return f"term {n} : {pretty_type(t)} = {pretty_expr(b)};"
    raise TypeError(f"not a declaration: {d!r}")


def pretty(p) -> str:
    """Canonical text for a program or any single AST node."""
    if isinstance(p, Program):
        return "".join(pretty_decl(d) + "\n" for d in p.decls)
    if isinstance(p, (TypeDecl, IsoDecl, TermDecl)):
        return pretty_decl(p)
    if isinstance(p, TypeExpr):
        return pretty_type(p)
    if isinstance(p, FunTypeExpr):
        return pretty_funty(p)
    return pretty_expr(p)


# ------------------------------------------------------------ utilities


def strip_positions(node):
    """Copy of an AST with every position set to ``None``."""
    if isinstance(node, tuple):
        return tuple(strip_positions(x) for x in node)
    if isinstance(node, Program):
        return Program(tuple(strip_positions(d) for d in node.decls))
    if is_dataclass(node) and not isinstance(node, type):
        changes = {}
        for f in fields(node):
            v = getattr(node, f.name)
            if f.name == "pos":
                changes["pos"] = None
            elif isinstance(v, (tuple, TypeExpr, FunTypeExpr, TermExpr, IsoExpr)):
                changes[f.name] = strip_positions(v)
        return replace(node, **changes)
    return node


def free_vars(t: TermExpr) -> list[str]:
    """Free term variables in order of first occurrence (with repeats)."""
    out: list[str] = []

    def go(u: TermExpr, bound: frozenset) -> None:
        match u:
            case Var(n):
                if n not in bound:
                    out.append(n)
            case Unit() | Nil() | BitLit():
                pass
            case InL(b) | InR(b) | Fold(b) | Next(b):
                go(b, bound)
            case Pair(a, b) | Cons(a, b):
                go(a, bound)
                go(b, bound)
            case LetPair(x, y, b, c):
                go(b, bound)
                go(c, bound | {x, y})
            case App(_, a) | DelayedApp(_, a):
                go(a, bound)
            case _:
                raise TypeError(f"not a term: {u!r}")

    go(t, frozenset())
    return out


def contains_next(t: TermExpr) -> bool:
    match t:
        case Next():
            return True
        case Var() | Unit() | Nil() | BitLit():
            return False
        case InL(b) | InR(b) | Fold(b):
            return contains_next(b)
        case Pair(a, b) | Cons(a, b):
            return contains_next(a) or contains_next(b)
        case LetPair(bound=b, body=c):
            return contains_next(b) or contains_next(c)
        case App(_, a) | DelayedApp(_, a):
            return contains_next(a)
    raise TypeError(f"not a term: {t!r}")
