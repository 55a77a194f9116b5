"""Acceptance criteria for the interpreter, analyzer and CLI.

Each test prints one ``PASS``/``FAIL`` line and appends it to
``conftest.ACCEPTANCE_RESULTS`` so the terminal summary lists all nine.
"""

import contextlib
import os
import random
import subprocess
import sys
import time

import pytest

from aleph.analyzer import RuleId, build_rule_table, check_ambiguity, check_linearity
from aleph.engine import Engine, Stall, inertia_violations, render_trace
from aleph.parser import parse_multiterm
from aleph.terms import UNIT, WITNESS_SYMBOL_NAME, Sym, is_ground
from aleph.unify import unify_sequence
from conftest import ACCEPTANCE_RESULTS, load
from oracles import naive_match_seq, peano

T = parse_multiterm

# every trace produced by criteria 1-4, inspected again by criterion 5
TRACES = []


@contextlib.contextmanager
def criterion(number, title, limit=None):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        if limit is not None:
            assert elapsed < limit, f"took {elapsed:.2f}s, limit {limit}s"
    except BaseException as exc:
        line = f"FAIL criterion {number}: {title} ({type(exc).__name__}: {exc})"
        ACCEPTANCE_RESULTS.append(line)
        print(line)
        raise
    line = f"PASS criterion {number}: {title} ({time.perf_counter() - start:.2f}s)"
    ACCEPTANCE_RESULTS.append(line)
    print(line)


@pytest.fixture(scope="module")
def engine():
    return Engine(build_rule_table(load("arith.al")))


def add_input(a, b):
    return (Sym("+"), peano(a), peano(b), UNIT)


def add_output(a, b):
    return (UNIT, peano(a + b), peano(b), Sym("+"))


def sq_input(m):
    return (Sym("Sq"), peano(m), UNIT)


def sq_output(n):
    return (UNIT, peano(n), Sym("Sq"))


def run_addition(engine):
    result = engine.run(T("+ 3 2 ()"))
    TRACES.append(result.trace)
    return result


def run_squaring(engine):
    result = engine.run(T("Sq 3 ()"))
    TRACES.append(result.trace)
    return result


def run_roots(engine):
    root = engine.run(T("() 9 Sq"))
    TRACES.append(root.trace)
    with pytest.raises(Stall) as info:
        engine.run(T("() 10 Sq"))
    TRACES.append(info.value.trace)
    return root, info.value


def round_trip(engine, inputs):
    failures = []
    for terms in inputs:
        fwd = engine.run(terms)
        back = engine.run(fwd.final)
        TRACES.extend([fwd.trace, back.trace])
        if back.final != terms:
            failures.append((terms, "input not recovered"))
        elif back.trace.rules != [r.inverse() for r in reversed(fwd.trace.rules)]:
            failures.append((terms, "reverse rules are not the inverted mirror"))
    return failures


def reversibility_inputs():
    rng = random.Random(20240601)
    pairs = [(rng.randint(0, 30), rng.randint(0, 30)) for _ in range(200)]
    return [add_input(a, b) for a, b in pairs] + [sq_input(m) for m in range(13)]


def test_criterion_1_addition_trace(engine):
    with criterion(1, "addition golden trace", limit=1.0):
        result = run_addition(engine)
        assert result.final == T("() 5 2 +")
        assert result.trace.rules == [RuleId("add-step")]
        (outer,) = result.trace.entries[2].children
        assert outer.subrule.label == "add-step-sub" and not outer.reverse
        assert outer.trace.states == [T("+ 3 1 ()"), T("() 4 1 +")]
        assert outer.trace.rules == [RuleId("add-step")]
        (inner,) = outer.trace.entries[2].children
        assert inner.trace.states == [T("+ 3 Z ()"), T("() 3 Z +")]
        assert inner.trace.rules == [RuleId("add-base")]
        assert not inner.trace.entries[2].children
        assert render_trace(result.trace) == [
            "! + 3 2 ()",
            "| () 5 2 +  -- add-step",
            "  : add-step-sub",
            "    ! + 3 1 ()",
            "    | () 4 1 +  -- add-step",
            "      : add-step-sub",
            "        ! + 3 0 ()",
            "        | () 3 0 +  -- add-base",
            "        ! () 3 0 +",
            "    ! () 4 1 +",
            "! () 5 2 +",
        ]


def test_criterion_2_squaring_trace(engine):
    with criterion(2, "squaring golden trace", limit=1.0):
        result = run_squaring(engine)
        expected = ["Sq 3 ()", "Sq Z 3 Sq", "Sq 5 2 Sq", "Sq 8 1 Sq", "Sq 9 Z Sq", "() 9 Sq"]
        assert result.trace.states == [T(s) for s in expected]
        assert result.final == T("() 9 Sq")


def test_criterion_3_square_root_and_stall(engine):
    with criterion(3, "square root and stall", limit=1.0):
        root, stall = run_roots(engine)
        assert root.final == T("Sq 3 ()")
        states = ["() 10 Sq", "Sq 10 Z Sq", "Sq 9 1 Sq", "Sq 6 2 Sq", "Sq 1 3 Sq"]
        assert stall.trace.states == [T(s) for s in states]
        assert stall.reason == "unification-failure"
        assert stall.terms == T("() Z 3 +")
        assert dict(stall.bindings) == {"s''": peano(0), "k": peano(3)}
        assert stall.render()[:2] == ["stall: unification-failure at () 0 3 +",
                                      "bindings: {s'' ↦ 0, k ↦ 3}"]


def test_criterion_4_reversibility(engine):
    with criterion(4, "reversibility, 200 additions and squares m <= 12", limit=30.0):
        assert round_trip(engine, reversibility_inputs()) == []


def test_criterion_5_inertia(engine):
    with criterion(5, "inertia across the traces of criteria 1-4"):
        if not TRACES:  # run in isolation
            run_addition(engine)
            run_squaring(engine)
            run_roots(engine)
            round_trip(engine, reversibility_inputs())
        violations = [v for tr in TRACES for v in inertia_violations(tr)]
        levels = sum(1 for tr in TRACES for _ in tr.walk())
        assert levels > len(TRACES)  # nested traces were inspected too
        assert violations == []


def test_criterion_6_confluence(engine):
    with criterion(6, "confluence of Sq m () over 50 seeds", limit=60.0):
        divergences = []
        for m in range(11):
            reference = engine.run(sq_input(m))
            for seed in range(50):
                result = engine.run(sq_input(m), seed=seed)
                if result.final != reference.final or result.trace.states != reference.trace.states:
                    divergences.append((m, seed))
        assert divergences == []


def test_criterion_7_integer_oracle(engine):
    with criterion(7, "agreement with integer arithmetic"):
        failures = []
        for a in range(31):
            for b in range(31):
                if engine.run(add_input(a, b)).final != add_output(a, b):
                    failures.append(("add", a, b))
        squares = {m * m: m for m in range(13)}
        for n in range(145):
            if n in squares:
                if engine.run(sq_output(n)).final != sq_input(squares[n]):
                    failures.append(("sqrt", n))
            elif n <= 60:
                try:
                    engine.run(sq_output(n))
                except Stall:
                    pass
                else:
                    failures.append(("no stall", n))
        assert failures == []


WITNESS = (Sym("A"), Sym(WITNESS_SYMBOL_NAME))


def _witness_ok(conflict):
    """The example is ground and every overlapping pattern matches it."""
    example = conflict.example
    return all(map(is_ground, example)) and all(
        unify_sequence(patterns, example) is not None
        and naive_match_seq(patterns, example) is not None
        for _, patterns in conflict.witnesses)


def test_criterion_8_static_analysis():
    with criterion(8, "ambiguity and linearity reports"):
        arith = load("arith.al")
        assert check_ambiguity(build_rule_table(arith)) == []

        (triple,) = check_ambiguity(build_rule_table(load("ambiguous_triple.al")))
        assert triple.kind == "triple-computational"
        assert triple.labels == ("to-b", "to-c", "to-d")
        assert triple.example == WITNESS and _witness_ok(triple)

        (pair,) = check_ambiguity(build_rule_table(load("ambiguous_halting.al")))
        assert pair.kind == "two-computational-plus-halting"
        assert pair.labels == ("to-b", "to-c", "!")
        assert pair.example == WITNESS and _witness_ok(pair)

        lint = check_linearity(arith)
        assert [(f.definition, f.variable, f.count) for f in lint.findings] == [
            ("add-step", "b", 4), ("sq-step", "k", 6)]
        assert not lint.fatal and check_linearity(arith, "strict").fatal


def _cli(*args, seed="0"):
    env = dict(os.environ, PYTHONHASHSEED=seed)
    return subprocess.run([sys.executable, "-m", "aleph", *args],
                          capture_output=True, text=True, env=env, timeout=60)


def test_criterion_9_cli_contract():
    with criterion(9, "CLI exit codes and stable machine output"):
        cases = {
            0: ("run", "arith.al", "--term", "+ 3 2 ()"),
            1: ("run", "arith.al", "--term", "+ x 2 ()"),
            2: ("check", "ambiguous_triple.al"),
            4: ("run", "arith.al", "--term", "() 10 Sq"),
            5: ("run", "counter.al", "--fuel", "50", "--term", "Count ()"),
        }
        codes = {expected: _cli(*argv).returncode for expected, argv in cases.items()}
        assert codes == {k: k for k in cases}
        argv = ("run", "pairs.al", "--machine", "--seed", "3", "--term", "Pair 4 3 2 5 ()")
        first, second = _cli(*argv, seed="1"), _cli(*argv, seed="2")
        assert first.returncode == 0 and first.stdout
        assert first.stdout.encode() == second.stdout.encode()
