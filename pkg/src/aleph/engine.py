"""Inertial evaluation of multiterms.

A multiterm moves through tagged states::

    [t|⊤]  --!-->  (t|!)  --r-->  (t'|r)  --s-->  ...  -->  [u|⊥]

and the rule applied at each step is picked from the match set so that the
inverse of the previous rule is never chosen.  Applying a rule unifies the
multiterm with the rule's left side, runs its sub-rules as child
evaluations, and substitutes the resulting bindings into the right side.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Union

from .analyzer import HALT, OrientedRule, RuleId, RuleTable, SubRule
from .terms import Multiterm, render_multiterm
from .unify import (
    Bindings,
    UnboundVariable,
    can_substitute,
    substitute_sequence,
    unify_sequence,
)


@dataclass(frozen=True)
class HaltInitial:
    terms: Multiterm


@dataclass(frozen=True)
class HaltFinal:
    terms: Multiterm


@dataclass(frozen=True)
class Active:
    terms: Multiterm
    last: RuleId


Tagged = Union[HaltInitial, HaltFinal, Active]


@dataclass(frozen=True)
class EvalState:
    rule: RuleId
    pending: frozenset
    applied: frozenset
    bindings: Bindings


# -- traces -----------------------------------------------------------------

@dataclass
class SubTrace:
    subrule: SubRule
    reverse: bool  # the right side was instantiated (comp-sub_r)
    trace: Trace

    @property
    def label(self) -> str:
        return self.subrule.label + ("~" if self.reverse else "")


@dataclass
class TraceEntry:
    state: Tagged
    rule: RuleId | None  # None for the initial entry
    children: tuple[SubTrace, ...] = ()


@dataclass
class Trace:
    entries: list[TraceEntry] = field(default_factory=list)

    @property
    def rules(self) -> list[RuleId]:
        """Computational rules applied at this level, in order."""
        return [e.rule for e in self.entries if e.rule is not None and not e.rule.is_halt]

    @property
    def states(self) -> list[Multiterm]:
        """The initial multiterm followed by each computational result."""
        out = [e.state.terms for e in self.entries[:1]]
        out += [e.state.terms for e in self.entries if e.rule is not None and not e.rule.is_halt]
        return out

    def walk(self) -> Iterable[Trace]:
        """This trace and every nested child trace, depth first."""
        stack = [self]
        while stack:
            t = stack.pop()
            yield t
            for e in reversed(t.entries):
                stack.extend(reversed([c.trace for c in e.children]))


def render_trace(trace: Trace, sugar: bool = True, indent: int = 0) -> list[str]:
    pad = " " * indent
    lines = []
    for e in trace.entries:
        text = render_multiterm(e.state.terms, sugar)
        if e.rule is None or isinstance(e.state, HaltFinal):
            lines.append(f"{pad}! {text}")
        elif e.rule.is_halt:
            continue
        else:
            lines.append(f"{pad}| {text}  -- {e.rule}")
            for child in e.children:
                lines.append(f"{pad}  : {child.label}")
                lines.extend(render_trace(child.trace, sugar, indent + 4))
    return lines


# -- failures ---------------------------------------------------------------

STALL_REASONS = ("no-match", "ambiguous", "unification-failure", "unbound-sub-rule",
                 "fuel-exhausted")


class EngineError(Exception):
    """An internal invariant of the engine was broken."""


class LeftoverBindings(EngineError):
    def __init__(self, rule: RuleId, bindings: Bindings):
        self.rule = rule
        self.bindings = bindings
        super().__init__(f"rule {rule} left bindings unconsumed: {bindings.render()}")


class Stall(Exception):
    """The evaluation reached a state with no sanctioned continuation."""

    def __init__(self, reason: str, terms: Multiterm, *, bindings: Bindings | None = None,
                 state: Tagged | EvalState | None = None, location: tuple[str, ...] = (),
                 message: str = ""):
        assert reason in STALL_REASONS, reason
        self.reason = reason
        self.terms = terms
        self.bindings = bindings if bindings is not None else Bindings()
        self.state = state
        self.location = location
        self.message = message
        self.trace: Trace | None = None
        super().__init__(f"stall: {reason} at {render_multiterm(terms)}")

    def render(self, sugar: bool = True) -> list[str]:
        lines = [f"stall: {self.reason} at {render_multiterm(self.terms, sugar)}",
                 f"bindings: {self.bindings.render(sugar)}",
                 f"location: {' > '.join(self.location) or 'root'}"]
        if self.message:
            lines.append(f"detail: {self.message}")
        return lines


class FuelExhausted(Stall):
    def __init__(self, terms: Multiterm, location: tuple[str, ...] = ()):
        super().__init__("fuel-exhausted", terms, location=location)


# -- evaluation -------------------------------------------------------------

@dataclass
class RunResult:
    final: Multiterm
    trace: Trace
    steps: int
    warnings: list[str]


class _Context:
    def __init__(self, fuel: int | None, seed: int | None, record: bool):
        self.fuel = fuel
        self.steps = 0
        self.rng = random.Random(seed) if seed is not None else None
        self.record = record
        self.warnings: list[str] = []

    def spend(self, terms: Multiterm, location: tuple[str, ...]):
        if self.fuel is not None and self.steps >= self.fuel:
            raise FuelExhausted(terms, location)
        self.steps += 1


class Engine:
    """Evaluator bound to one rule table.  Holds no per-run state."""

    def __init__(self, table: RuleTable):
        self.table = table
        self._order = {rid: i for i, rid in enumerate(table.entries)}
        self._rules_by_len: dict[int, list[OrientedRule]] = {}
        for rule in table.rules:
            self._rules_by_len.setdefault(len(rule.lhs), []).append(rule)
        self._halting_by_len: dict[int, list] = {}
        for h in table.halting:
            self._halting_by_len.setdefault(len(h.pattern), []).append(h.pattern)

    def match_set(self, terms: Multiterm) -> frozenset[RuleId]:
        found = {r.id for r in self._rules_by_len.get(len(terms), ())
                 if unify_sequence(r.lhs, terms) is not None}
        if any(unify_sequence(p, terms) is not None
               for p in self._halting_by_len.get(len(terms), ())):
            found.add(HALT)
        return frozenset(found)

    def _sorted(self, ids: Iterable[RuleId]) -> list[RuleId]:
        return sorted(ids, key=lambda r: self._order.get(r, -1))

    def _describe(self, m: frozenset[RuleId]) -> str:
        return "{" + ", ".join(map(str, self._sorted(m))) + "}"

    # step ---------------------------------------------------------------

    def step(self, state: Tagged, *, fuel: int | None = None, seed: int | None = None) -> Tagged:
        """One transition of ``state``; raises :class:`Stall` if there is none."""
        return self._step(state, _Context(fuel, seed, True), ())[0]

    def _step(self, state: Tagged, ctx: _Context,
              location: tuple[str, ...]) -> tuple[Tagged, TraceEntry]:
        if isinstance(state, HaltFinal):
            raise ValueError("cannot step a final state")
        t = state.terms
        ctx.spend(t, location)
        m = self.match_set(t)

        if isinstance(state, HaltInitial):
            if HALT in m:
                nxt = Active(t, HALT)
                return nxt, TraceEntry(nxt, HALT)
            raise Stall("no-match", t, state=state, location=location,
                        message=f"initial multiterm matches no halting pattern; ℳ = {self._describe(m)}")

        if state.last.is_halt:
            comp = m - {HALT}
            if HALT in m and not comp:
                nxt = HaltFinal(t)
                return nxt, TraceEntry(nxt, HALT)
            if HALT in m and len(comp) == 1:
                return self._apply_step(next(iter(comp)), t, ctx, location)
            reason = "ambiguous" if len(comp) > 1 else "no-match"
            raise Stall(reason, t, state=state, location=location,
                        message=f"ℳ = {self._describe(m)} after !")

        inverse = state.last.inverse()
        if inverse not in m:
            raise EngineError(f"{inverse} does not match {render_multiterm(t)} produced by {state.last}")
        rest = m - {inverse}
        if rest == {HALT}:
            nxt = HaltFinal(t)
            return nxt, TraceEntry(nxt, HALT)
        if len(rest) == 1:
            return self._apply_step(next(iter(rest)), t, ctx, location)
        reason = "no-match" if not rest else "ambiguous"
        raise Stall(reason, t, state=state, location=location,
                    message=f"ℳ = {self._describe(m)} after {state.last}")

    def _apply_step(self, rid: RuleId, t: Multiterm, ctx: _Context,
                    location: tuple[str, ...]) -> tuple[Tagged, TraceEntry]:
        out, children = self._apply(rid, t, ctx, location)
        nxt = Active(out, rid)
        return nxt, TraceEntry(nxt, rid, tuple(children))

    # rule application ---------------------------------------------------

    def apply_rule(self, rid: RuleId, terms: Multiterm, *, fuel: int | None = None,
                   seed: int | None = None) -> tuple[Multiterm, list[SubTrace]]:
        return self._apply(rid, terms, _Context(fuel, seed, True), ())

    def _apply(self, rid: RuleId, terms: Multiterm, ctx: _Context,
               location: tuple[str, ...]) -> tuple[Multiterm, list[SubTrace]]:
        rule = self.table[rid]
        bindings = unify_sequence(rule.lhs, terms)
        if bindings is None:
            raise Stall("unification-failure", terms, location=location,
                        message=f"{render_multiterm(terms)} does not match the left side of {rid}")
        pending = list(rule.subs)
        applied: list[SubRule] = []
        children: list[SubTrace] = []

        def snapshot():
            return EvalState(rid, frozenset(pending), frozenset(applied), bindings)

        while pending:
            ready = []
            for sub in pending:
                left = can_substitute(sub.lhs, bindings)
                right = can_substitute(sub.rhs, bindings)
                if left or right:
                    ready.append((sub, left, right))
            if not ready:
                raise Stall("unbound-sub-rule", terms, bindings=bindings, state=snapshot(),
                            location=location,
                            message="no pending sub-rule has a fully bound side: "
                                    + ", ".join(s.label for s in pending))
            sub, left, right = ready[0] if ctx.rng is None else ctx.rng.choice(ready)
            if left and right:
                ctx.warnings.append(f"{rid}: both sides of {sub.label} are bound; "
                                    "instantiating the left side")
            source, target = (sub.lhs, sub.rhs) if left else (sub.rhs, sub.lhs)
            before = bindings
            seed_terms, bindings = substitute_sequence(source, bindings)
            child_loc = location + (f"{rid}:{sub.label}{'' if left else '~'}",)
            child_trace, result = self._evaluate(seed_terms, ctx, child_loc)
            joined = unify_sequence(target, result, bindings)
            if joined is None:
                bindings = before
                raise Stall("unification-failure", result, bindings=before, state=snapshot(),
                            location=child_loc,
                            message=f"result of {sub.label} does not match "
                                    f"{render_multiterm(target)}")
            bindings = joined
            pending.remove(sub)
            applied.append(sub)
            children.append(SubTrace(sub, not left, child_trace))

        try:
            out, rest = substitute_sequence(rule.rhs, bindings)
        except UnboundVariable as exc:
            raise Stall("unbound-sub-rule", terms, bindings=bindings, state=snapshot(),
                        location=location, message=str(exc)) from None
        if len(rest):
            raise LeftoverBindings(rid, rest)
        return out, children

    # closure ------------------------------------------------------------

    def _evaluate(self, terms: Multiterm, ctx: _Context,
                  location: tuple[str, ...]) -> tuple[Trace, Multiterm]:
        state: Tagged = HaltInitial(terms)
        trace = Trace([TraceEntry(state, None)])
        try:
            while not isinstance(state, HaltFinal):
                state, entry = self._step(state, ctx, location)
                if ctx.record or isinstance(state, HaltFinal):
                    trace.entries.append(entry)
        except Stall as stall:
            if not location and stall.trace is None:
                stall.trace = trace
            raise
        return trace, state.terms

    def run(self, terms: Multiterm, *, fuel: int | None = None, seed: int | None = None,
            trace: bool = True) -> RunResult:
        """Evaluate ``terms`` from its initial halting state to a final one.

        ``fuel`` bounds the number of steps across all nested evaluations.
        ``seed`` randomises the order in which ready sub-rules are applied.
        """
        if not terms:
            raise ValueError("cannot evaluate an empty multiterm")
        ctx = _Context(fuel, seed, trace)
        tr, final = self._evaluate(tuple(terms), ctx, ())
        return RunResult(final, tr, ctx.steps, ctx.warnings)


def match_set(table: RuleTable, terms: Multiterm) -> frozenset[RuleId]:
    return Engine(table).match_set(terms)


def step(table: RuleTable, state: Tagged) -> Tagged:
    return Engine(table).step(state)


def apply_rule(table: RuleTable, rid: RuleId, terms: Multiterm) -> tuple[Multiterm, list[SubTrace]]:
    return Engine(table).apply_rule(rid, terms)


def run(table: RuleTable, terms: Multiterm, *, fuel: int | None = None,
        seed: int | None = None, trace: bool = True) -> RunResult:
    return Engine(table).run(terms, fuel=fuel, seed=seed, trace=trace)


def inertia_violations(trace: Trace) -> list[tuple[RuleId, RuleId]]:
    """Adjacent (r, r⁻¹) pairs at any level of ``trace``."""
    bad = []
    for t in trace.walk():
        rules = t.rules
        bad += [(a, b) for a, b in zip(rules, rules[1:]) if b == a.inverse()]
    return bad
