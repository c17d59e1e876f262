import pytest
from hypothesis import given, settings, strategies as st

from gpm.props import DEMOS, demo_source, random_programs
from gpm.syntax import (
    InL, InR, Mu, Next, One, Pair, Sum, TVar, Unit, Var, desugar, parse_program, parse_term, parse_type,
)
from gpm.typecheck import (
    ERROR_CODES, QUBIT, TypeCheckError, check_program, exhaustive, infer_term, orthogonal, same_depth,
    type_eq, unfold, wf_type,
)


def codes(src: str) -> list[str]:
    return [d["code"] for d in check_program(desugar(parse_program(src))).diagnostics]


@pytest.mark.parametrize("name", DEMOS)
def test_demos_typecheck(name):
    assert codes(demo_source(name)) == []


@pytest.mark.parametrize(
    "src, code",
    [
        ("type T = 1 + X;", "UnboundTypeVar"),
        ("type T = mu X . X + 1;", "UnguardedMu"),
        ("iso f : 1 * 1 <-> 1 * 1 = { (x, y) <-> (x, x) };", "VarUsedTwice"),
        ("iso f : 1 + 1 <-> 1 + 1 = { inl x <-> inl y | inr y <-> inr y };", "ClauseContextMismatch"),
        ("iso f : 1 <-> 1 + 1 = { x <-> x };", "ClauseContextMismatch"),
        ("iso delay : 1 <-> @1 = { x <-> next x };", "DepthMismatch"),
        ("iso f : 1 + 1 <-> 1 + 1 = { inl () <-> inl () | x <-> x };", "OverlappingPatterns"),
        ("term t : 1 = inl ();", "TypeMismatch"),
        ("iso f : (1 <-> 1) -> (1 <-> 1) = \\p : 1 <-> 1 . p;\niso h : 1 <-> 1 = { x <-> f x };", "NotAnIsoType"),
        ("iso q : 1 <-> 1 = fix r : 1 <-> 1 . { x <-> x };", "TypeMismatch"),
    ],
)
def test_rejections(src, code):
    assert code in ERROR_CODES
    assert codes(src)[:1] == [code]


def test_context_errors_from_open_terms():
    with pytest.raises(TypeCheckError) as e:
        infer_term({}, {}, parse_term("x"), One())
    assert e.value.code == "UnboundVar"
    with pytest.raises(TypeCheckError) as e:
        infer_term({}, {"x": (One(), 0), "y": (One(), 0)}, parse_term("x"), One())
    assert e.value.code == "VarUnused"
    with pytest.raises(TypeCheckError) as e:
        infer_term({}, {"x": (One(), 0)}, parse_term("next x"), parse_type("@1"))
    assert e.value.code == "LatencyMismatch"
    assert type_eq(infer_term({}, {"x": (One(), 1)}, parse_term("next x"), parse_type("@1")), parse_type("@1"))


def test_diagnostic_carries_span_and_decl():
    cp = check_program(desugar(parse_program("iso delay : 1 <-> @1 = { x <-> next x };")))
    assert not cp.ok
    (d,) = cp.diagnostics
    assert d["decl"] == "delay" and d["span"] == [1, 26]


def test_guardedness():
    wf_type((), parse_type("mu X . 1 + @X"))
    wf_type((), parse_type("mu X . 1 + @(X * X)"))
    for bad in ("mu X . X", "mu X . 1 + X", "mu X . mu Y . X + @Y"):
        with pytest.raises(TypeCheckError) as e:
            wf_type((), parse_type(bad))
        assert e.value.code == "UnguardedMu"


def test_alpha_equivalence_and_unfolding():
    a = parse_type("mu X . 1 + @X")
    b = parse_type("mu Y . 1 + @Y")
    assert type_eq(a, b)
    assert not type_eq(a, parse_type("mu X . 1 + @(X * 1)"))
    assert type_eq(unfold(a), Sum(One(), parse_type("@(mu Z . 1 + @Z)")))


def test_same_depth_examples():
    x, y = Var("x"), Var("y")
    assert same_depth(x, y) is not None
    assert same_depth(Next(x), Next(y)) is not None
    assert same_depth(x, Next(x)) is None
    d = same_depth(Pair(Next(x), Next(y)), Next(Pair(x, y)))
    assert d is not None and d.leaves()


def test_orthogonality_and_coverage():
    assert orthogonal(InL(Unit()), InR(Var("x")))
    assert not orthogonal(InL(Unit()), Var("x"))
    assert exhaustive([InL(Var("a")), InR(Var("b"))], QUBIT)
    assert not exhaustive([InL(Unit())], QUBIT)
    nat = parse_type("mu X . 1 + @X")
    assert exhaustive([parse_term("fold (inl ())"), parse_term("fold (inr t)")], nat)


small_terms = st.recursive(
    st.sampled_from([Unit(), Var("x"), Var("y")]),
    lambda k: st.one_of(st.builds(InL, k), st.builds(InR, k), st.builds(Next, k), st.builds(Pair, k, k)),
    max_leaves=5,
)


@given(small_terms, small_terms)
def test_same_depth_is_symmetric_and_orthogonality_too(t, u):
    assert (same_depth(t, u) is None) == (same_depth(u, t) is None)
    assert orthogonal(t, u) == orthogonal(u, t)
    assert not orthogonal(t, t)


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_generated_programs_typecheck(seed):
    for name, cp in random_programs(seed, 3):
        assert cp.ok, (name, cp.diagnostics)


def test_mu_binder_names_do_not_leak():
    t = Mu("X", Sum(One(), TVar("X")))
    with pytest.raises(TypeCheckError):
        wf_type((), t)


def test_more_depth_and_orthogonality_examples():
    from gpm.typecheck import guarded_in

    assert same_depth(parse_term("next (inl x)"), parse_term("inl (next x)")) is not None
    assert orthogonal(parse_term("fold (inl ())"), parse_term("fold (inr (h, t))"))
    assert not orthogonal(parse_term("inl x"), parse_term("inl y"))
    assert guarded_in("X", parse_type("@X"))
    assert not guarded_in("X", parse_type("X * @X"))
    assert guarded_in("X", parse_type("1 + (1 + 1) * @X"))
