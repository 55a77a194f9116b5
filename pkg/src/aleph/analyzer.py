"""Rule table construction and static checks.

The rule table holds both orientations of every computational definition
plus the halting patterns.  Two checks run over a program before it is
executed:

* a linearity lint, reporting variables that do not occur exactly twice in
  a computational definition;
* an ambiguity check, reporting multiterms that would match three
  computational patterns, or two computational patterns and a halting one.
  Overlaps are decided by first-order unification of the patterns.
"""

from __future__ import annotations

import enum
import itertools
import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .parser import Halting, Program
from .terms import (
    UNIT,
    WITNESS_SYMBOL_NAME,
    Multiterm,
    PatternTerm,
    Seq,
    Sym,
    Var,
    render_multiterm,
)
from .unify import pattern_variables


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    HALT = "halt"


@dataclass(frozen=True)
class RuleId:
    base: str
    direction: Direction = Direction.FORWARD

    def inverse(self) -> RuleId:
        if self.direction is Direction.FORWARD:
            return RuleId(self.base, Direction.BACKWARD)
        if self.direction is Direction.BACKWARD:
            return RuleId(self.base, Direction.FORWARD)
        return self

    @property
    def is_halt(self) -> bool:
        return self.direction is Direction.HALT

    def __str__(self):
        if self.is_halt:
            return "!"
        return self.base + ("~" if self.direction is Direction.BACKWARD else "")

    def __lt__(self, other):
        return (self.base, self.direction.value) < (other.base, other.direction.value)


HALT = RuleId("!", Direction.HALT)


@dataclass(frozen=True)
class SubRule:
    index: int
    label: str
    lhs: tuple[PatternTerm, ...]
    rhs: tuple[PatternTerm, ...]


@dataclass(frozen=True)
class OrientedRule:
    id: RuleId
    lhs: tuple[PatternTerm, ...]
    rhs: tuple[PatternTerm, ...]
    subs: tuple[SubRule, ...]


@dataclass(frozen=True)
class HaltingEntry:
    label: str
    pattern: tuple[PatternTerm, ...]


UNIT_ENTRY = HaltingEntry("unit", (UNIT,))


class DuplicateLabel(Exception):
    pass


@dataclass(frozen=True)
class RuleTable:
    entries: dict  # RuleId -> OrientedRule, in definition order
    halting: tuple[HaltingEntry, ...]

    def __getitem__(self, rid: RuleId) -> OrientedRule:
        return self.entries[rid]

    def __contains__(self, rid) -> bool:
        return rid in self.entries

    @property
    def rules(self) -> list[OrientedRule]:
        return list(self.entries.values())

    def by_length(self, n: int) -> list[OrientedRule]:
        return [r for r in self.entries.values() if len(r.lhs) == n]

    def halting_by_length(self, n: int) -> list[HaltingEntry]:
        return [h for h in self.halting if len(h.pattern) == n]


def build_rule_table(p: Program) -> RuleTable:
    seen: set[str] = set()
    names: dict[int, str] = {}
    for d in p.definitions:
        if d.label is not None:
            if d.label in seen:
                raise DuplicateLabel(f"duplicate label {d.label!r} ({d.source}:{d.line})")
            seen.add(d.label)
    for i, d in enumerate(p.definitions):
        name = d.name
        k = 1
        # unlabelled definitions sharing a line get a numeric suffix
        while d.label is None and name in seen:
            k += 1
            name = f"{d.name}#{k}"
        seen.add(name)
        names[i] = name
    entries: dict[RuleId, OrientedRule] = {}
    halting: list[HaltingEntry] = []
    for i, d in enumerate(p.definitions):
        if isinstance(d, Halting):
            halting.append(HaltingEntry(names[i], d.pattern))
            continue
        subs = tuple(SubRule(j, s.label or f"{names[i]}.{j + 1}", s.lhs, s.rhs)
                     for j, s in enumerate(d.subs))
        fwd = RuleId(names[i], Direction.FORWARD)
        entries[fwd] = OrientedRule(fwd, d.head.lhs, d.head.rhs, subs)
        bwd = fwd.inverse()
        # sub-rules are not swapped; the engine runs them in either direction
        entries[bwd] = OrientedRule(bwd, d.head.rhs, d.head.lhs, subs)
    halting.append(UNIT_ENTRY)
    return RuleTable(entries, tuple(halting))


# -- findings ---------------------------------------------------------------

@dataclass(frozen=True)
class Finding:
    severity: str  # 'warning' or 'error'
    code: str
    label: str
    message: str
    witness: str | None = None
    kind: str = ""

    def render(self) -> str:
        parts = [self.severity, self.code, self.label, self.message]
        if self.witness is not None:
            parts.append(f"witness: {self.witness}")
        return " ".join(parts)

    def to_dict(self) -> dict:
        return {"severity": self.severity, "code": self.code, "kind": self.kind,
                "labels": self.label.split(","), "message": self.message,
                "witness": self.witness}


@dataclass(frozen=True)
class LinearityFinding:
    variable: str
    count: int
    definition: str
    positions: tuple[str, ...]


@dataclass
class LinearityReport:
    mode: str
    findings: list[LinearityFinding]

    @property
    def fatal(self) -> bool:
        return self.mode == "strict" and bool(self.findings)

    def as_findings(self) -> list[Finding]:
        sev = "error" if self.mode == "strict" else "warning"
        return [Finding(sev, "L001", f.definition,
                        f"variable {f.variable} occurs {f.count} times (expected 2) "
                        f"at {', '.join(f.positions)}", kind="linearity")
                for f in self.findings]


def check_linearity(p: Program, mode: str = "lint") -> LinearityReport:
    if mode not in ("lint", "strict"):
        raise ValueError(f"unknown mode {mode!r}")
    findings = []
    for d in p.computational:
        sides = [("lhs", d.head.lhs), ("rhs", d.head.rhs)]
        for i, s in enumerate(d.subs):
            sides += [(f"sub{i + 1}.lhs", s.lhs), (f"sub{i + 1}.rhs", s.rhs)]
        where: dict[str, list[str]] = defaultdict(list)
        for side, patterns in sides:
            for v in pattern_variables(patterns):
                where[v].append(side)
        for v, places in where.items():
            if len(places) != 2:
                findings.append(LinearityFinding(v, len(places), d.name, tuple(places)))
    return LinearityReport(mode, findings)


# -- pattern overlap --------------------------------------------------------

def rename_apart(patterns: Sequence[PatternTerm], tag: str) -> tuple[PatternTerm, ...]:
    def go(p):
        if isinstance(p, Var):
            return Var(f"{p.name}#{tag}")
        if isinstance(p, Seq):
            return Seq([go(x) for x in p.items])
        return p
    return tuple(go(p) for p in patterns)


def _walk(t: PatternTerm, subst: dict[str, PatternTerm]) -> PatternTerm:
    while isinstance(t, Var) and t.name in subst:
        t = subst[t.name]
    return t


def _occurs(name: str, t: PatternTerm, subst: dict[str, PatternTerm]) -> bool:
    stack = [t]
    while stack:
        x = _walk(stack.pop(), subst)
        if isinstance(x, Var):
            if x.name == name:
                return True
        elif isinstance(x, Seq):
            stack.extend(x.items)
    return False


def unify_patterns(pairs: Iterable[tuple[PatternTerm, PatternTerm]],
                   subst: dict[str, PatternTerm] | None = None) -> dict[str, PatternTerm] | None:
    """First-order unification with occurs check.

    Returns a triangular substitution, or ``None`` if not unifiable.
    """
    subst = dict(subst or {})
    stack = list(pairs)
    while stack:
        a, b = stack.pop()
        a, b = _walk(a, subst), _walk(b, subst)
        if isinstance(a, Var) and isinstance(b, Var) and a.name == b.name:
            continue
        if isinstance(a, Var):
            if _occurs(a.name, b, subst):
                return None
            subst[a.name] = b
        elif isinstance(b, Var):
            if _occurs(b.name, a, subst):
                return None
            subst[b.name] = a
        elif isinstance(a, Sym) and isinstance(b, Sym):
            if a.name != b.name:
                return None
        elif isinstance(a, Seq) and isinstance(b, Seq):
            if len(a.items) != len(b.items):
                return None
            stack.extend(zip(a.items, b.items))
        else:
            return None
    return subst


def _resolve(t: PatternTerm, subst: dict[str, PatternTerm], fresh: Sym) -> PatternTerm:
    t = _walk(t, subst)
    if isinstance(t, Var):
        return fresh
    if isinstance(t, Seq):
        return Seq([_resolve(x, subst, fresh) for x in t.items])
    return t


def pattern_overlap(seqs: Sequence[Sequence[PatternTerm]]) -> Multiterm | None:
    """A ground multiterm matching every pattern sequence, if one exists.

    The sequences must have their variables renamed apart.  Variables left
    free by the most general unifier are grounded with the reserved witness
    symbol.
    """
    if not seqs:
        return None
    n = len(seqs[0])
    if any(len(s) != n for s in seqs):
        return None
    pairs = [(seqs[0][i], s[i]) for s in seqs[1:] for i in range(n)]
    subst = unify_patterns(pairs)
    if subst is None:
        return None
    fresh = Sym(WITNESS_SYMBOL_NAME)
    return tuple(_resolve(t, subst, fresh) for t in seqs[0])


@dataclass(frozen=True)
class Conflict:
    kind: str  # 'triple-computational' | 'two-computational-plus-halting'
    witnesses: tuple[tuple[str, tuple[PatternTerm, ...]], ...]
    example: Multiterm

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.witnesses)

    def as_finding(self) -> Finding:
        code = "A001" if self.kind == "triple-computational" else "A002"
        pats = "; ".join(f"{label}: {render_multiterm(p)}" for label, p in self.witnesses)
        return Finding("error", code, ",".join(self.labels),
                       f"{self.kind} overlap [{pats}]",
                       render_multiterm(self.example), kind=self.kind)


def check_ambiguity(table: RuleTable) -> list[Conflict]:
    """Every triple of computational patterns, and every pair plus a halting
    pattern, that some multiterm matches simultaneously."""
    buckets: dict[int, list[tuple[str, tuple]]] = defaultdict(list)
    for rule in table.rules:
        buckets[len(rule.lhs)].append((str(rule.id), rule.lhs))
    halting: dict[int, list[tuple[str, tuple]]] = defaultdict(list)
    for h in table.halting:
        halting[len(h.pattern)].append(("!", h.pattern))

    conflicts: list[Conflict] = []
    for n in sorted(buckets):
        comp = [(label, rename_apart(p, str(i))) for i, (label, p) in enumerate(buckets[n])]
        halts = [(label, rename_apart(p, f"h{i}")) for i, (label, p) in enumerate(halting.get(n, []))]
        overlapping = set()
        for (i, a), (j, b) in itertools.combinations(enumerate(comp), 2):
            if pattern_overlap([a[1], b[1]]) is None:
                continue
            overlapping.add((i, j))
            for h in halts:
                witness = pattern_overlap([a[1], b[1], h[1]])
                if witness is not None:
                    conflicts.append(Conflict(
                        "two-computational-plus-halting",
                        ((a[0], _original(a[1])), (b[0], _original(b[1])), ("!", _original(h[1]))),
                        witness))
                    break
        # a triple can only overlap if each of its pairs does
        for i, j, k in itertools.combinations(range(len(comp)), 3):
            if not {(i, j), (i, k), (j, k)} <= overlapping:
                continue
            a, b, c = comp[i], comp[j], comp[k]
            witness = pattern_overlap([a[1], b[1], c[1]])
            if witness is not None:
                conflicts.append(Conflict(
                    "triple-computational",
                    tuple((x[0], _original(x[1])) for x in (a, b, c)), witness))
    return conflicts


def _original(patterns: Sequence[PatternTerm]) -> tuple[PatternTerm, ...]:
    def go(p):
        if isinstance(p, Var):
            return Var(p.name.split("#", 1)[0])
        if isinstance(p, Seq):
            return Seq([go(x) for x in p.items])
        return p
    return tuple(go(p) for p in patterns)


@dataclass
class CheckReport:
    linearity: LinearityReport
    conflicts: list[Conflict]

    @property
    def findings(self) -> list[Finding]:
        return self.linearity.as_findings() + [c.as_finding() for c in self.conflicts]

    @property
    def exit_code(self) -> int:
        if self.conflicts:
            return 2
        if self.linearity.fatal:
            return 3
        return 0

    def render(self) -> str:
        return "".join(f.render() + "\n" for f in self.findings)

    def to_json(self) -> str:
        return json.dumps({"findings": [f.to_dict() for f in self.findings],
                           "exit_code": self.exit_code}, sort_keys=True, ensure_ascii=False)


def check_program(p: Program, strict: bool = False) -> tuple[RuleTable, CheckReport]:
    table = build_rule_table(p)
    report = CheckReport(check_linearity(p, "strict" if strict else "lint"),
                         check_ambiguity(table))
    return table, report
