"""Command-line entry point: ``gpm check|run|denote|dagger|agree|props``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .category import dim, enumerate_elems, normal_form, render_elem, render_shape, shape_json
from .errors import GpmError
from .evaluator import Evaluator, defined_at, force, render_value
from .guarded import GuardedSession, daggerability_failure, stage_bound
from .hilb import DEFAULT_TOL, HilbBackend
from .pinj import PInjBackend
from .props import SUITES, agree_on, run_suites, summarize
from .semantics import Semantics, value_of_elem
from .syntax import Clauses, ParseError, desugar, parse_program, parse_type, pretty
from .typecheck import CheckedProgram, TypeCheckError, check_program, resolve_type, wf_type


@dataclass(frozen=True)
class SessionConfig:
    backend: str = "pinj"
    bound: int = 8
    tol: float = DEFAULT_TOL
    json: bool = False
    seed: int = 0

    def make_backend(self):
        return HilbBackend(self.tol) if self.backend == "hilb" else PInjBackend()


class CliError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


def _emit(cfg: SessionConfig, payload: dict, text: str) -> None:
    if cfg.json:
        sys.stdout.write(json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def load_checked(path: str) -> CheckedProgram:
    try:
        src = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}")
    return check_program(desugar(parse_program(src)))


def _require_clean(cp: CheckedProgram) -> None:
    if cp.diagnostics:
        d = cp.diagnostics[0]
        raise CliError(f"program does not typecheck: {d['code']}: {d['message']}", 1)


# ------------------------------------------------------------------ check


def cmd_check(args, cfg: SessionConfig) -> int:
    try:
        cp = load_checked(args.file)
    except ParseError as e:
        diag = {"code": "ParseError", "message": str(e), "span": [e.line, e.col], "decl": None}
        _emit(cfg, {"command": "check", "ok": False, "diagnostics": [diag]}, f"{args.file}:{e.line}:{e.col}: {e}")
        return 1
    diags = cp.diagnostics
    lines = [
        f"{args.file}:{d['span'][0]}:{d['span'][1]}: {d['code']}: {d['message']}" if d["span"]
        else f"{args.file}: {d['code']}: {d['message']}"
        for d in diags
    ]
    if not diags:
        lines = [f"{args.file}: ok ({len(cp.isos)} isos, {len(cp.terms)} terms)"]
    _emit(cfg, {"command": "check", "ok": not diags, "diagnostics": diags}, "\n".join(lines))
    return 0 if not diags else 1


# -------------------------------------------------------------------- run


def cmd_run(args, cfg: SessionConfig) -> int:
    cp = load_checked(args.file)
    _require_clean(cp)
    if args.term not in cp.terms:
        raise CliError(f"no term named {args.term}")
    v = Evaluator(cp).run(args.term, args.budget)
    text = render_value(v)
    _emit(cfg, {"command": "run", "term": args.term, "budget": args.budget, "value": text}, text)
    return 0


# ----------------------------------------------------------------- denote


def _first_clauses(cp: CheckedProgram, name: str) -> Clauses | None:
    from .props import _children

    stack = [cp.isos[name]]
    while stack:
        w = stack.pop(0)
        if isinstance(w, Clauses):
            return w
        stack.extend(_children(w))
    return None


def _type_of(args, cp: CheckedProgram | None):
    aliases = cp.aliases if cp else {}
    t = resolve_type(parse_type(args.type, types=tuple(aliases)), aliases)
    wf_type((), t)
    return t


def cmd_denote(args, cfg: SessionConfig) -> int:
    backend = cfg.make_backend()
    cp = load_checked(args.file) if args.file else None
    if cp:
        _require_clean(cp)
    if args.type is not None:
        ty = _type_of(args, cp)
        c = GuardedSession(backend).denote_type(ty)
        stages = []
        for n in range(args.stage + 1):
            s = c.stage(n)
            entry = {
                "stage": n,
                "dim": dim(s),
                "shape": shape_json(s),
                "normal_form": shape_json(normal_form(s)),
            }
            if n < args.stage:
                r = c.restriction(n)
                entry["restriction"] = backend.to_json(r)
                entry["restriction_dagger_epi"] = backend.is_dagger_epi(r)
            stages.append(entry)
        payload = {"command": "denote", "type": pretty(ty), "backend": backend.name, "stages": stages}
        text = "\n".join(
            f"stage {e['stage']}: dim {e['dim']:>4}  {_short_shape(c.stage(e['stage']))}"
            + ("" if "restriction_dagger_epi" not in e else f"  (restriction dagger epi: {e['restriction_dagger_epi']})")
            for e in stages
        )
        _emit(cfg, payload, text)
        return 0
    if cp is None or args.iso is None:
        raise CliError("denote needs FILE --iso NAME, or --type TYPE")
    if args.iso not in cp.isos:
        raise CliError(f"no iso named {args.iso}")
    sem = Semantics(backend, cp)
    v = sem.iso(args.iso)
    f = v.at(args.stage)
    staged = sem.staged(v)
    bad = daggerability_failure(staged, cfg.bound)
    block = _first_clauses(cp, args.iso)
    exhaustive = None if block is None else bool(block.ann.lhs_exhaustive and block.ann.rhs_exhaustive)
    iso_flag = "unitary" if backend.name == "hilb" else "bijective"
    flags = {
        "daggerable": bad is None,
        iso_flag: backend.is_dagger_iso(f),
        "exhaustive": exhaustive,
        "checked_up_to": cfg.bound,
    }
    payload = {"command": "denote", "iso": args.iso, "stage": args.stage, "morphism": backend.to_json(f), "flags": flags}
    _emit(cfg, payload, _render_mor(backend, f) + "\n" + json.dumps(flags, sort_keys=True))
    return 0


def _short_shape(s) -> str:
    text = render_shape(normal_form(s))
    return text if len(text) <= 60 else text[:57] + "..."


def _render_mor(backend, f) -> str:
    j = backend.to_json(f)
    head = f"{render_shape(backend.src(f))} → {render_shape(backend.dst(f))}"
    if j["backend"] == "pinj":
        body = "\n".join(f"  {a} ↦ {b}" for a, b in j["pairs"]) or "  (empty)"
        return head + "\n" + body
    rows = []
    for r, row in zip(j["rows"], j["matrix"]):
        cells = " ".join(f"{re:+.4f}{im:+.4f}i" for re, im in row)
        rows.append(f"  {r:>24} | {cells}")
    return head + "\n" + "\n".join(rows)


# ----------------------------------------------------------------- dagger


def cmd_dagger(args, cfg: SessionConfig) -> int:
    backend = cfg.make_backend()
    cp = load_checked(args.file)
    _require_clean(cp)
    if args.iso not in cp.isos:
        raise CliError(f"no iso named {args.iso}")
    sem = Semantics(backend, cp)
    v = sem.iso(args.iso)
    fd = backend.dagger(v.at(args.stage))
    bad = daggerability_failure(sem.staged(v), cfg.bound)
    payload = {
        "command": "dagger",
        "iso": args.iso,
        "stage": args.stage,
        "morphism": backend.to_json(fd),
        "daggerable": bad is None,
        "first_failure": bad,
        "checked_up_to": cfg.bound,
    }
    verdict = "daggerable" if bad is None else f"not daggerable (fails at stage {bad})"
    _emit(cfg, payload, _render_mor(backend, fd) + f"\n{verdict} up to stage {cfg.bound}")
    return 0


# ------------------------------------------------------------------ agree


def agree_iso(sem: Semantics, ev: Evaluator, iso: str, n: int,
              corrupt: Callable | None = None) -> tuple[bool, str, int]:
    """Check every element of the stage-``n`` domain; returns (ok, witness, count)."""
    if corrupt is not None:
        f = corrupt(sem.denote_iso(iso, n))
        v = sem.iso(iso)
        v._memo[n] = f
    ty = sem.iso(iso).ty
    count = 0
    for e in enumerate_elems(sem.shape_of(ty.dom, n)):
        arg = value_of_elem(e, ty.dom, n)
        ok, why = agree_on(sem, ev, iso, arg, n)
        count += 1
        if not ok:
            return False, f"input {render_value(force(arg, n))} ({render_elem(e)}): {why}", count
    return True, "", count


def agree_term(sem: Semantics, ev: Evaluator, cp: CheckedProgram, term: str, n: int,
               corrupt: Callable | None = None) -> tuple[bool, str]:
    b = sem.backend
    ty = cp.term_types[term]
    den = sem.term(term, n)
    if corrupt is not None:
        den = corrupt(den)
    v = ev.run(term, n)
    if defined_at(v, n):
        want = sem.point(v, ty, n)
    else:
        want = b.zero_mor(b.src(den), b.dst(den))
    if b.eq(den, want):
        return True, ""
    return False, f"value {render_value(v)}: denotation {b.to_json(den)} vs {b.to_json(want)}"


def corrupt_pinj(f):
    """Test fixture: drop one pair of a partial injection (or add one if empty)."""
    from .pinj import PInjMor

    pairs = f.pairs
    if pairs:
        return PInjMor(f.src, f.dst, dict(pairs[1:]))
    src, dst = enumerate_elems(f.src), enumerate_elems(f.dst)
    if src and dst:
        return PInjMor(f.src, f.dst, {src[0]: dst[0]})
    return f


def cmd_agree(args, cfg: SessionConfig) -> int:
    cp = load_checked(args.file)
    _require_clean(cp)
    sem = Semantics(PInjBackend(), cp)
    ev = Evaluator(cp)
    corrupt = corrupt_pinj if args.corrupt else None
    if args.term:
        if args.term not in cp.terms:
            raise CliError(f"no term named {args.term}")
        ok, why = agree_term(sem, ev, cp, args.term, args.stage, corrupt)
        subject, count = args.term, 1
    elif args.iso:
        if args.iso not in cp.isos:
            raise CliError(f"no iso named {args.iso}")
        ok, why, count = agree_iso(sem, ev, args.iso, args.stage, corrupt)
        subject = args.iso
    else:
        raise CliError("agree needs --term NAME or --iso NAME")
    payload = {"command": "agree", "subject": subject, "stage": args.stage, "pass": ok, "checked": count, "witness": why or None}
    _emit(cfg, payload, f"PASS {subject} at stage {args.stage} ({count} checked)" if ok else f"FAIL {subject}: {why}")
    return 0 if ok else 1


# ------------------------------------------------------------------ props


def cmd_props(args, cfg: SessionConfig) -> int:
    suites = None if args.suite in (None, "all") else [s.strip() for s in args.suite.split(",")]
    stage = cfg.bound if args.stage is None else args.stage
    checks = run_suites(suites, N=stage, seed=cfg.seed, random_count=args.random)
    table = summarize(checks)
    failures = [{"suite": c.suite, "subject": c.subject, "detail": c.detail} for c in checks if not c.ok]
    payload = {"command": "props", "stage": stage, "seed": cfg.seed, "summary": table, "failures": failures}
    lines = [f"{s:<16} pass {row['pass']:>4}  fail {row['fail']:>3}" for s, row in table.items()]
    lines += [f"FAIL {f['suite']} {f['subject']} {f['detail']}" for f in failures]
    _emit(cfg, payload, "\n".join(lines))
    return 0 if not failures else 1


# ------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--backend", choices=("pinj", "hilb"), default="pinj")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="hilb equality tolerance")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="gpm", description="Guarded reversible pattern-matching toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="parse and typecheck a program")
    c.add_argument("file")

    r = sub.add_parser("run", parents=[common], help="evaluate a term declaration")
    r.add_argument("file")
    r.add_argument("--term", required=True)
    r.add_argument("--budget", type=int, default=8)

    d = sub.add_parser("denote", parents=[common], help="stage denotation of an iso or a type")
    d.add_argument("file", nargs="?")
    g = d.add_mutually_exclusive_group(required=True)
    g.add_argument("--iso")
    g.add_argument("--type")
    d.add_argument("--stage", type=int, default=2)

    dg = sub.add_parser("dagger", parents=[common], help="pointwise dagger and daggerability")
    dg.add_argument("file")
    dg.add_argument("--iso", required=True)
    dg.add_argument("--stage", type=int, default=2)

    a = sub.add_parser("agree", parents=[common], help="compare evaluation with the denotation")
    a.add_argument("file")
    a.add_argument("--term")
    a.add_argument("--iso")
    a.add_argument("--stage", type=int, default=3)
    a.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)

    pr = sub.add_parser("props", parents=[common], help="run the law-checking suites")
    pr.add_argument("--suite", default="all", help=f"comma-separated subset of: {', '.join(SUITES)}")
    pr.add_argument("--stage", type=int, default=None)
    pr.add_argument("--random", type=int, default=50, help="number of random types and programs")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for k in ("stage", "budget"):
        if getattr(args, k, None) is not None and getattr(args, k) < 0:
            parser.error(f"--{k} must be non-negative")
    if args.tol <= 0:
        parser.error("--tol must be positive")
    try:
        bound = stage_bound()
    except ValueError as e:
        parser.error(str(e))
    cfg = SessionConfig(args.backend, bound, args.tol, args.json, args.seed)
    handlers = {
        "check": cmd_check,
        "run": cmd_run,
        "denote": cmd_denote,
        "dagger": cmd_dagger,
        "agree": cmd_agree,
        "props": cmd_props,
    }
    try:
        return handlers[args.command](args, cfg)
    except CliError as e:
        print(f"gpm: {e}", file=sys.stderr)
        return e.code
    except (ParseError, TypeCheckError, GpmError) as e:
        print(f"gpm: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
