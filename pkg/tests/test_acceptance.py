"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line (also collected into the
terminal summary).  Expected values come from oracles defined here that do not
use the package's denotation code: counting lists, a direct circuit simulator,
and a pure-python list mapper.  Time limits and tolerances are pinned below.
"""

import itertools
import time

import numpy as np
import pytest

from conftest import record
from gpm.category import I, SumO, normal_form
from gpm.errors import GpmError
from gpm.evaluator import Evaluator
from gpm.guarded import GuardedSession, daggerability_failure, next_mor, restrictions_dagger_epi, shapes_stable
from gpm.hilb import HilbBackend
from gpm.pinj import PInjBackend
from gpm.props import bit, demo_source, list_value, random_types, run_suites
from gpm.semantics import Semantics, elem_of_value, hilb_block
from gpm.syntax import Mu, desugar, parse_program, parse_type
from gpm.typecheck import TypeCheckError, check_program, wf_type

LIMIT_NAT_S = 1.0
LIMIT_QLIST_S = 1.0
LIMIT_FLIP_S = 1.0
LIMIT_MAP_S = 1.0
LIMIT_QFT_S = 10.0
LIMIT_LAWS_S = 60.0
LIMIT_STABLE_S = 5.0
QFT_TOL = 1e-9
LAW_STAGE = 6
LAW_RANDOM = 50
LAW_SEED = 0


def _report(n: int, ok: bool, text: str) -> None:
    record(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {text}")


# ---------------------------------------------------------------- oracles


def lists_up_to(n: int, alphabet: int) -> int:
    """Number of lists over ``alphabet`` symbols with length at most ``n``."""
    return sum(1 for k in range(n + 1) for _ in itertools.product(range(alphabet), repeat=k))


def unit_sum(k: int):
    """Left-nested sum of ``k`` copies of the unit object."""
    out = I
    for _ in range(k - 1):
        out = SumO(out, I)
    return out


def circuit_qft(k: int) -> np.ndarray:
    """Hadamard plus controlled phases, qubit 0 most significant, no final swaps."""
    size = 2 ** k
    had = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    u = np.eye(size, dtype=complex)
    for j in range(k):
        gate = np.kron(np.kron(np.eye(2 ** j), had), np.eye(2 ** (k - j - 1)))
        u = gate @ u
        for m in range(j + 1, k):
            phase = np.exp(2j * np.pi / 2 ** (m - j + 1))
            diag = np.ones(size, dtype=complex)
            for x in range(size):
                if (x >> (k - 1 - j)) & 1 and (x >> (k - 1 - m)) & 1:
                    diag[x] = phase
            u = np.diag(diag) @ u
    return u


def dft(k: int) -> np.ndarray:
    size = 2 ** k
    w = np.exp(2j * np.pi / size)
    return np.array([[w ** (x * y) for y in range(size)] for x in range(size)]) / np.sqrt(size)


def bit_reversal(k: int) -> np.ndarray:
    size = 2 ** k
    r = np.zeros((size, size))
    for x in range(size):
        r[int(format(x, f"0{k}b")[::-1] or "0", 2), x] = 1
    return r


def map_oracle(bits):
    return [1 - b for b in bits]


def _bits(max_len: int):
    for k in range(max_len + 1):
        yield from (list(p) for p in itertools.product((0, 1), repeat=k))


def _checked(name: str):
    return check_program(desugar(parse_program(demo_source(name))))


# --------------------------------------------------------------- criteria


def test_criterion_1_nat_stages():
    t0 = time.perf_counter()
    c = GuardedSession(PInjBackend()).denote_type(parse_type("mu X . 1 + @X"))
    dims = c.dims(4)
    shapes = [normal_form(c.stage(n)) for n in range(3)]
    epi = restrictions_dagger_epi(c, 4)
    elapsed = time.perf_counter() - t0
    want = [lists_up_to(n, 1) for n in range(5)]
    ok = dims == want == [1, 2, 3, 4, 5] and shapes == [unit_sum(1), unit_sum(2), unit_sum(3)] and epi and elapsed < LIMIT_NAT_S
    _report(1, ok, f"nat dims {dims}, shapes I / I+I / (I+I)+I, dagger-epi restrictions {epi}, {elapsed:.3f}s")
    assert dims == want
    assert shapes == [unit_sum(1), unit_sum(2), unit_sum(3)]
    assert epi
    assert elapsed < LIMIT_NAT_S


def test_criterion_2_qubit_list_dims():
    t0 = time.perf_counter()
    c = GuardedSession(HilbBackend()).denote_type(parse_type("mu X . 1 + 2*@X"))
    dims = c.dims(6)
    elapsed = time.perf_counter() - t0
    want = [lists_up_to(n, 2) for n in range(7)]
    ok = dims == want == [2 ** (n + 1) - 1 for n in range(7)] and elapsed < LIMIT_QLIST_S
    _report(2, ok, f"qubit-list dims {dims}, {elapsed:.3f}s")
    assert dims == want == [2 ** (n + 1) - 1 for n in range(7)]
    assert elapsed < LIMIT_QLIST_S


def test_criterion_3_flip():
    t0 = time.perf_counter()
    cp = _checked("flip")
    sem = Semantics(PInjBackend(), cp)
    ev = Evaluator(cp)
    b = sem.backend
    ty = cp.iso_types["flip"].dom
    problems = []
    compared = 0
    for n in range(1, 5):
        f = sem.denote_iso("flip", n)
        if not (b.is_dagger_iso(f) and b.eq(b.compose(f, f), b.identity(b.src(f)))):
            problems.append(f"stage {n}: not a total involution")
        if not b.eq(b.dagger(f), f):
            problems.append(f"stage {n}: dagger differs")
        for bits in _bits(min(n, 4)):
            v = list_value(bit(x) for x in bits)
            out = ev.apply_named("flip", v, n)
            den = f.fwd.get(elem_of_value(v, ty, n))
            if den != elem_of_value(out, ty, n):
                problems.append(f"stage {n}: {bits}")
            compared += 1
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < LIMIT_FLIP_S
    _report(3, ok, f"flip involutive and self-dagger at stages 1-4, {compared} eval/denote comparisons, {elapsed:.3f}s")
    assert not problems, problems
    assert elapsed < LIMIT_FLIP_S


def test_criterion_4_map_not():
    t0 = time.perf_counter()
    cp = _checked("map")
    sem = Semantics(PInjBackend(), cp)
    ty = cp.iso_types["mapnot"].dom
    f = sem.denote_iso("mapnot", 4)
    inputs = list(_bits(4))
    want = {
        elem_of_value(list_value(bit(x) for x in bits), ty, 4): elem_of_value(list_value(bit(x) for x in map_oracle(bits)), ty, 4)
        for bits in inputs
    }
    elapsed = time.perf_counter() - t0
    ok = len(inputs) == 31 and f.fwd == want and elapsed < LIMIT_MAP_S
    _report(4, ok, f"map(not) at stage 4 matches the brute-force mapper on {len(inputs)} lists, {elapsed:.3f}s")
    assert len(inputs) == 31
    assert f.fwd == want
    assert elapsed < LIMIT_MAP_S


def qft_blocks(ks=(1, 2, 3)):
    cp = _checked("qft")
    sem = Semantics(HilbBackend(), cp)
    ty = cp.iso_types["qft"].dom
    out = {}
    for k in ks:
        m = sem.denote_iso("qft", k)
        els = [elem_of_value(list_value(bit(x) for x in bits), ty, k) for bits in itertools.product((0, 1), repeat=k)]
        out[k] = hilb_block(m, els, els)
    return out


def test_criterion_5_qft():
    t0 = time.perf_counter()
    blocks = qft_blocks()
    elapsed = time.perf_counter() - t0
    errs = {k: float(np.abs(blk - circuit_qft(k)).max()) for k, blk in blocks.items()}
    worst = max(errs.values())
    ok = worst <= QFT_TOL and elapsed < LIMIT_QFT_S
    _report(5, ok, f"QFT blocks k=1,2,3 match the H/controlled-phase circuit, max error {worst:.2e}, {elapsed:.3f}s")
    assert worst <= QFT_TOL
    assert elapsed < LIMIT_QFT_S


@pytest.mark.parametrize("k", [1, 2, 3])
def test_qft_circuit_is_bit_reversed_dft(k):
    # the circuit without final swaps is the DFT followed by a bit reversal,
    # and so is the denotation
    assert np.abs(circuit_qft(k) - bit_reversal(k) @ dft(k)).max() <= QFT_TOL
    assert np.abs(qft_blocks((k,))[k] - bit_reversal(k) @ dft(k)).max() <= QFT_TOL


def test_criterion_6_law_suites():
    t0 = time.perf_counter()
    checks = run_suites(N=LAW_STAGE, seed=LAW_SEED, random_count=LAW_RANDOM)
    elapsed = time.perf_counter() - t0
    failed = [c for c in checks if not c.ok]
    ok = checks and not failed and elapsed < LIMIT_LAWS_S
    _report(6, ok, f"{len(checks)} law checks at N={LAW_STAGE}, {len(failed)} failures, {elapsed:.1f}s")
    assert checks
    assert not failed, [(c.suite, c.subject, c.detail) for c in failed[:5]]
    assert elapsed < LIMIT_LAWS_S


def test_criterion_7_shape_stabilization():
    t0 = time.perf_counter()
    session = GuardedSession(PInjBackend())
    functors = [parse_type("mu X . 1 + @X"), parse_type("mu X . 1 + (1 + 1) * @X")]
    functors += [t for t in random_types(seed=3, count=40, max_depth=4) if isinstance(t, Mu)]
    unstable = []
    for mu in functors:
        for j in range(4):
            if not shapes_stable(session, mu, j):
                unstable.append((mu, j))
    elapsed = time.perf_counter() - t0
    ok = not unstable and elapsed < LIMIT_STABLE_S
    _report(7, ok, f"F^m Z(j) stable for m in j+1..j+4 over {len(functors)} functors, j<4, {elapsed:.3f}s")
    assert not unstable
    assert elapsed < LIMIT_STABLE_S


def test_criterion_8_negative_controls():
    codes = {}
    with pytest.raises(TypeCheckError) as e:
        wf_type((), parse_type("mu X . X"))
    codes["unguarded"] = e.value.code
    for name, demo in (("depth", "bad_depth"), ("overlap", "bad_overlap")):
        diags = _checked(demo).diagnostics
        codes[name] = diags[0]["code"] if diags else None
    c = GuardedSession(PInjBackend()).denote_type(parse_type("mu X . 1 + @X"))
    failure = daggerability_failure(next_mor(c), 3)
    ok = (
        codes == {"unguarded": "UnguardedMu", "depth": "DepthMismatch", "overlap": "OverlappingPatterns"}
        and failure is not None
    )
    _report(8, ok, f"rejections {sorted(codes.values())}, next not daggerable (first failure at stage {failure})")
    assert codes == {"unguarded": "UnguardedMu", "depth": "DepthMismatch", "overlap": "OverlappingPatterns"}
    assert failure is not None
    assert issubclass(TypeCheckError, GpmError)
