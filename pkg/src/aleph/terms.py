"""Ground terms, pattern terms and their canonical rendering.

A term is either a symbol or a (possibly empty) sequence of terms.  Patterns
share the same constructors plus :class:`Var`.  All values are immutable and
hashable; equality is structural and never recurses on the Python stack, so
very deep Peano numerals are safe to compare.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Tuple, Union

RESERVED = frozenset("()!=:;.")

#: Symbol used to ground free variables in analyzer witnesses.  The lexer
#: refuses it, so it can never collide with a program symbol.
WITNESS_SYMBOL_NAME = "_"

ZERO = "Z"
SUCC = "S"


class Sym:
    """An atomic identifier leaf."""

    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("sym", name)))

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        return isinstance(other, Sym) and other.name == self.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Sym({self.name!r})"

    def __reduce__(self):
        return (Sym, (self.name,))


class Var:
    """A pattern variable.  Never appears inside a ground term."""

    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("var", name)))

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        return isinstance(other, Var) and other.name == self.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r})"

    def __reduce__(self):
        return (Var, (self.name,))


class Seq:
    """A parenthesised sequence of terms; ``Seq(())`` is unit."""

    __slots__ = ("items", "_hash")

    def __init__(self, items: Iterable[Term] = ()):
        items = tuple(items)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "_hash", hash(("seq",) + tuple(hash(i) for i in items)))

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        if not isinstance(other, Seq):
            return False
        return term_equal(self, other)

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.items)

    def __iter__(self) -> Iterator[Term]:
        return iter(self.items)

    def __repr__(self):
        return f"Seq({list(self.items)!r})"

    def __reduce__(self):
        return (Seq, (self.items,))


Term = Union[Sym, Seq]
PatternTerm = Union[Sym, Var, Seq]
Multiterm = Tuple[Term, ...]

UNIT = Seq(())


def term_equal(a: PatternTerm, b: PatternTerm) -> bool:
    """Structural equality, computed with an explicit stack."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        if type(x) is not type(y) or x._hash != y._hash:
            return False
        if isinstance(x, Seq):
            if len(x.items) != len(y.items):
                return False
            stack.extend(zip(x.items, y.items))
        elif x.name != y.name:
            return False
    return True


def is_ground(t: PatternTerm) -> bool:
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            return False
        if isinstance(x, Seq):
            stack.extend(x.items)
    return True


def numeral(n: int) -> Term:
    """The Peano encoding of ``n``: ``Z`` or ``(S <n-1>)``."""
    if n < 0:
        raise ValueError("numerals are nonnegative")
    t: Term = Sym(ZERO)
    s = Sym(SUCC)
    for _ in range(n):
        t = Seq((s, t))
    return t


def numeral_value(t: PatternTerm) -> int | None:
    """Inverse of :func:`numeral`; ``None`` if ``t`` is not a Peano chain."""
    n = 0
    while isinstance(t, Seq):
        if len(t.items) != 2 or t.items[0] != Sym(SUCC):
            return None
        t = t.items[1]
        n += 1
    if isinstance(t, Sym) and t.name == ZERO:
        return n
    return None


def render_term(t: PatternTerm, sugar: bool = True, zero: str = "0") -> str:
    """Canonical text of a term or pattern term.

    With ``sugar`` a Peano chain of depth n prints as the decimal ``n``, and
    ``Z`` itself prints as ``zero``.
    """
    out: list[str] = []
    # work items are either terms or literal closing parens
    stack: list[object] = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, str):
            out.append(x)
            continue
        if isinstance(x, (Sym, Var)):
            if sugar and isinstance(x, Sym) and x.name == ZERO:
                out.append(zero)
            else:
                out.append(x.name)
            continue
        if sugar:
            n = numeral_value(x)
            if n is not None:
                out.append(str(n))
                continue
        out.append("(")
        stack.append(")")
        for i, item in enumerate(reversed(x.items)):
            stack.append(item)
            if i < len(x.items) - 1:
                stack.append(" ")
    return "".join(out)


def render_multiterm(terms: Iterable[PatternTerm], sugar: bool = True, zero: str = "0") -> str:
    return " ".join(render_term(t, sugar, zero) for t in terms)


def term_size(t: PatternTerm) -> int:
    """Number of nodes, counting each sequence and each leaf once."""
    n = 0
    stack = [t]
    while stack:
        x = stack.pop()
        n += 1
        if isinstance(x, Seq):
            stack.extend(x.items)
    return n
