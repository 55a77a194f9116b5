"""Pattern unification against ground terms, and its inverse, substitution.

Unifying consumes a term into variable bindings; substituting consumes the
bindings back into a term.  Each binding carries a count of remaining uses so
that variables repeated inside a pattern (the nonlinear extension) are bound
once, equality checked on every further occurrence, and released only when
every occurrence has been substituted.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Iterator, Mapping, Sequence

from .terms import Multiterm, PatternTerm, Seq, Sym, Term, Var, render_term, term_equal


class UnboundVariable(Exception):
    def __init__(self, name: str, pattern: PatternTerm):
        self.name = name
        self.pattern = pattern
        super().__init__(f"unbound variable {name} in pattern {render_term(pattern)}")


class Bindings(Mapping[str, Term]):
    """Immutable map from variable name to ``(value, remaining_uses)``.

    As a :class:`Mapping` it exposes only the values; use :meth:`uses` for
    the counts.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[str, tuple[Term, int]] | None = None):
        entries = dict(entries or {})
        for name, (_, uses) in entries.items():
            if uses <= 0:
                raise ValueError(f"binding {name} has nonpositive uses")
        self._entries = entries

    @classmethod
    def of(cls, **values: Term) -> Bindings:
        return cls({k: (v, 1) for k, v in values.items()})

    def __getitem__(self, name: str) -> Term:
        return self._entries[name][0]

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other):
        if not isinstance(other, Bindings):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self):
        return hash(frozenset(self._entries.items()))

    def __repr__(self):
        inner = ", ".join(f"{k}: {render_term(v)}×{n}" for k, (v, n) in self._entries.items())
        return f"Bindings({{{inner}}})"

    def uses(self, name: str) -> int:
        entry = self._entries.get(name)
        return entry[1] if entry else 0

    def entries(self) -> dict[str, tuple[Term, int]]:
        return dict(self._entries)

    def union(self, other: Bindings) -> Bindings | None:
        """Disjoint union; ``None`` if a shared variable has different values.

        Shared variables with equal values add their use counts.
        """
        merged = dict(self._entries)
        for name, (value, uses) in other._entries.items():
            if name in merged:
                old, old_uses = merged[name]
                if not term_equal(old, value):
                    return None
                merged[name] = (old, old_uses + uses)
            else:
                merged[name] = (value, uses)
        return Bindings(merged)

    def render(self, sugar: bool = True) -> str:
        inner = ", ".join(f"{k} ↦ {render_term(v, sugar)}" for k, (v, _) in self._entries.items())
        return "{" + inner + "}"


EMPTY = Bindings()


def _unify(pattern: PatternTerm, term: Term, entries: dict[str, tuple[Term, int]]) -> bool:
    stack = [(pattern, term)]
    while stack:
        p, t = stack.pop()
        if isinstance(p, Var):
            bound = entries.get(p.name)
            if bound is None:
                entries[p.name] = (t, 1)
            elif term_equal(bound[0], t):
                entries[p.name] = (bound[0], bound[1] + 1)
            else:
                return False
        elif isinstance(p, Sym):
            if not (isinstance(t, Sym) and t.name == p.name):
                return False
        else:
            if not isinstance(t, Seq) or len(t.items) != len(p.items):
                return False
            stack.extend(reversed(list(zip(p.items, t.items))))
    return True


def unify(pattern: PatternTerm, term: Term, acc: Bindings = EMPTY) -> Bindings | None:
    """Match ground ``term`` against ``pattern``, extending ``acc``.

    Returns the extended bindings, or ``None`` when the term does not match.
    A variable that is already bound only matches an equal term, and gains
    one remaining use.
    """
    entries = acc.entries()
    if not _unify(pattern, term, entries):
        return None
    return Bindings(entries)


def unify_sequence(patterns: Sequence[PatternTerm], terms: Multiterm,
                   acc: Bindings = EMPTY) -> Bindings | None:
    if len(patterns) != len(terms):
        return None
    entries = acc.entries()
    for p, t in zip(patterns, terms):
        if not _unify(p, t, entries):
            return None
    return Bindings(entries)


def matches(patterns: Sequence[PatternTerm], terms: Multiterm) -> bool:
    return unify_sequence(patterns, terms) is not None


def _substitute(pattern: PatternTerm, entries: dict[str, tuple[Term, int]], root: PatternTerm) -> Term:
    if isinstance(pattern, Var):
        entry = entries.get(pattern.name)
        if entry is None:
            raise UnboundVariable(pattern.name, root)
        value, uses = entry
        if uses == 1:
            del entries[pattern.name]
        else:
            entries[pattern.name] = (value, uses - 1)
        return value
    if isinstance(pattern, Sym):
        return pattern
    return Seq([_substitute(p, entries, root) for p in pattern.items])


def substitute(pattern: PatternTerm, bindings: Bindings) -> tuple[Term, Bindings]:
    """Instantiate ``pattern``, spending one use of a binding per occurrence."""
    entries = bindings.entries()
    term = _substitute(pattern, entries, pattern)
    return term, Bindings(entries)


def substitute_sequence(patterns: Sequence[PatternTerm],
                        bindings: Bindings) -> tuple[Multiterm, Bindings]:
    entries = bindings.entries()
    terms = tuple(_substitute(p, entries, p) for p in patterns)
    return terms, Bindings(entries)


def pattern_variables(pattern: PatternTerm | Iterable[PatternTerm]) -> list[str]:
    """Every variable occurrence, left to right, with repetition.

    Accepts a single pattern term or a sequence of them.
    """
    out: list[str] = []
    stack = [pattern] if isinstance(pattern, (Sym, Var, Seq)) else list(pattern)[::-1]
    while stack:
        p = stack.pop()
        if isinstance(p, Var):
            out.append(p.name)
        elif isinstance(p, Seq):
            stack.extend(reversed(p.items))
    return out


def variable_counts(patterns: Iterable[PatternTerm]) -> Counter:
    return Counter(pattern_variables(list(patterns)))


def can_substitute(patterns: Sequence[PatternTerm], bindings: Bindings) -> bool:
    """True if every variable in ``patterns`` has enough remaining uses."""
    return all(bindings.uses(v) >= n for v, n in variable_counts(patterns).items())
