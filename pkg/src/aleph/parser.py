"""Lexer, parser and pretty-printer for program files and ground input.

Concrete syntax::

    -- a comment runs to the end of the line
    ! + a b () ;                               halting definition
    @add-base + a Z () = () a Z + ;            computational, optional label
    + a (S b) () = () (S c) (S b) + :          computational with sub-rules
        + a b () = () c b + .

Tokens are whitespace separated; ``( ) ! = : ; .`` delimit themselves.  A
token starting with a lowercase letter is a variable, anything else is a
symbol.  With numeral sugar a decimal literal ``N`` stands for the Peano
numeral ``(S ... Z)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence, Union

from .terms import (
    RESERVED,
    WITNESS_SYMBOL_NAME,
    Multiterm,
    PatternTerm,
    Seq,
    Sym,
    Var,
    is_ground,
    numeral,
    render_multiterm,
)

PUNCTUATION = frozenset("()!=:;.")


class ParseError(Exception):
    """Syntax error with a source position and the set of expected tokens."""

    def __init__(self, message: str, source: str, line: int, column: int,
                 expected: Sequence[str] = ()):
        self.message = message
        self.source = source
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        text = f"{source}:{line}:{column}: {message}"
        if self.expected:
            text += f" (expected one of: {' '.join(self.expected)})"
        super().__init__(text)


class GroundnessError(ParseError):
    """A variable appeared where only ground terms are allowed."""


class Token(NamedTuple):
    kind: str  # 'punct', 'var', 'sym', 'num', 'label', 'eof'
    text: str
    line: int
    column: int


def is_variable_name(text: str) -> bool:
    return bool(text) and text[0].islower()


def tokenize(text: str, source: str = "<input>") -> Iterator[Token]:
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line, col = line + 1, 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in PUNCTUATION:
            yield Token("punct", c, line, col)
            i += 1
            col += 1
            continue
        start, start_col = i, col
        while i < n and not text[i].isspace() and text[i] not in PUNCTUATION:
            i += 1
            col += 1
        word = text[start:i]
        yield Token(_classify(word, source, line, start_col), word, line, start_col)
    yield Token("eof", "", line, col)


def _classify(word: str, source: str, line: int, col: int) -> str:
    if word.startswith("@"):
        if len(word) == 1:
            raise ParseError("empty label", source, line, col)
        return "label"
    if word == WITNESS_SYMBOL_NAME:
        raise ParseError(f"'{word}' is reserved", source, line, col)
    if word.isdigit():
        return "num"
    if is_variable_name(word):
        if not word.rstrip("'") or "'" in word.rstrip("'"):
            raise ParseError(f"bad variable name {word!r}", source, line, col)
        return "var"
    return "sym"


@dataclass(frozen=True)
class Rule:
    lhs: tuple[PatternTerm, ...]
    rhs: tuple[PatternTerm, ...]
    label: str | None = field(default=None, compare=False)
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Computational:
    head: Rule
    subs: tuple[Rule, ...] = ()
    label: str | None = field(default=None, compare=False)
    source: str = field(default="<input>", compare=False)
    line: int = field(default=0, compare=False)

    @property
    def name(self) -> str:
        return self.label or f"{self.source}:{self.line}"


@dataclass(frozen=True)
class Halting:
    pattern: tuple[PatternTerm, ...]
    label: str | None = field(default=None, compare=False)
    source: str = field(default="<input>", compare=False)
    line: int = field(default=0, compare=False)

    @property
    def name(self) -> str:
        return self.label or f"{self.source}:{self.line}"


Definition = Union[Computational, Halting]


@dataclass(frozen=True)
class Program:
    definitions: tuple[Definition, ...] = ()
    source_name: str = field(default="<input>", compare=False)

    def __add__(self, other: Program) -> Program:
        return Program(self.definitions + other.definitions,
                       f"{self.source_name}+{other.source_name}")

    @property
    def computational(self) -> list[Computational]:
        return [d for d in self.definitions if isinstance(d, Computational)]

    @property
    def halting(self) -> list[Halting]:
        return [d for d in self.definitions if isinstance(d, Halting)]


class _Parser:
    def __init__(self, text: str, source: str, numeral_sugar: bool):
        self.source = source
        self.sugar = numeral_sugar
        self.tokens = list(tokenize(text, source))
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, expected: Sequence[str] = (), tok: Token | None = None):
        tok = tok or self.tok
        got = "end of input" if tok.kind == "eof" else repr(tok.text)
        return ParseError(f"{message}, got {got}", self.source, tok.line, tok.column, expected)

    def at_pattern_start(self) -> bool:
        tok = self.tok
        return tok.kind in ("var", "sym", "num") or (tok.kind == "punct" and tok.text == "(")

    def pattern(self) -> PatternTerm:
        tok = self.advance()
        if tok.kind == "var":
            return Var(tok.text)
        if tok.kind == "sym":
            return Sym(tok.text)
        if tok.kind == "num":
            return numeral(int(tok.text)) if self.sugar else Sym(tok.text)
        if tok.kind == "punct" and tok.text == "(":
            items = []
            while not (self.tok.kind == "punct" and self.tok.text == ")"):
                if not self.at_pattern_start():
                    raise self.error("unterminated parenthesis", ["(", ")", "symbol", "variable"])
                items.append(self.pattern())
            self.advance()
            return Seq(items)
        raise self.error("expected a term", ["(", "symbol", "variable"], tok)

    def patterns(self) -> tuple[PatternTerm, ...]:
        items = []
        while self.at_pattern_start():
            items.append(self.pattern())
        return tuple(items)

    def expect(self, *texts: str) -> Token:
        tok = self.tok
        if tok.kind == "punct" and tok.text in texts:
            return self.advance()
        raise self.error("unexpected token", texts)

    def nonempty_patterns(self, what: str) -> tuple[PatternTerm, ...]:
        if not self.at_pattern_start():
            raise self.error(f"empty {what}", ["(", "symbol", "variable"])
        return self.patterns()

    def program(self) -> Program:
        # Clauses are assembled flatly: a rule ending in '.' is a sub-rule of
        # the nearest open ':' definition, anything else closes it.
        definitions: list = []
        open_def: dict | None = None

        def close():
            nonlocal open_def
            if open_def is not None:
                if not open_def["subs"]:
                    raise ParseError("definition opened with ':' has no sub-rules",
                                     self.source, *open_def["colon"], expected=["sub-rule"])
                definitions.append(Computational(
                    open_def["head"], tuple(open_def["subs"]), open_def["label"],
                    self.source, open_def["line"]))
                open_def = None

        while self.tok.kind != "eof":
            label = None
            start = self.tok
            if start.kind == "label":
                label = self.advance().text[1:]
            first = self.tok
            if first.kind == "punct" and first.text == "!":
                close()
                self.advance()
                pattern = self.nonempty_patterns("halting pattern")
                self.expect(";")
                definitions.append(Halting(pattern, label, self.source, start.line))
                continue
            if not self.at_pattern_start():
                raise self.error("expected a definition", ["!", "@label", "(", "symbol", "variable"])
            lhs = self.nonempty_patterns("left-hand side")
            self.expect("=")
            rhs = self.nonempty_patterns("right-hand side")
            end = self.expect(";", ":", ".")
            rule = Rule(lhs, rhs, label, start.line)
            if end.text == ".":
                if open_def is None:
                    raise ParseError("sub-rule outside a ':' definition, got '.'",
                                     self.source, end.line, end.column, [";", ":"])
                open_def["subs"].append(rule)
                continue
            close()
            if end.text == ";":
                definitions.append(Computational(Rule(lhs, rhs, None, start.line), (),
                                                 label, self.source, start.line))
            else:
                open_def = {"head": Rule(lhs, rhs, None, start.line), "subs": [], "label": label,
                            "line": start.line, "colon": (end.line, end.column)}
        close()
        return Program(tuple(definitions), self.source)


def parse_program(text: str, numeral_sugar: bool = True, source: str = "<input>") -> Program:
    return _Parser(text, source, numeral_sugar).program()


def parse_patterns(text: str, numeral_sugar: bool = True, source: str = "<input>") -> tuple[PatternTerm, ...]:
    """Parse a bare sequence of pattern terms (variables allowed)."""
    p = _Parser(text, source, numeral_sugar)
    items = p.patterns()
    if p.tok.kind != "eof":
        raise p.error("unexpected token", ["(", "symbol", "variable", "end of input"])
    return items


def parse_multiterm(text: str, numeral_sugar: bool = True, source: str = "<input>") -> Multiterm:
    """Parse a nonempty, whitespace separated sequence of ground terms."""
    p = _Parser(text, source, numeral_sugar)
    items = []
    while p.tok.kind != "eof":
        start = p.pos
        if not p.at_pattern_start():
            raise p.error("unexpected token", ["(", "symbol"])
        item = p.pattern()
        if not is_ground(item):
            var = next(t for t in p.tokens[start:p.pos] if t.kind == "var")
            raise GroundnessError(f"variable {var.text!r} in ground input",
                                  source, var.line, var.column)
        items.append(item)
    if not items:
        raise p.error("empty multiterm", ["(", "symbol"])
    return tuple(items)


def parse_term(text: str, numeral_sugar: bool = True):
    terms = parse_multiterm(text, numeral_sugar)
    if len(terms) != 1:
        raise ParseError(f"expected one term, found {len(terms)}", "<input>", 1, 1)
    return terms[0]


def render_rule(rule: Rule, sugar: bool = True) -> str:
    # program text keeps the constructor spelling of zero
    return f"{render_multiterm(rule.lhs, sugar, 'Z')} = {render_multiterm(rule.rhs, sugar, 'Z')}"


def render_definition(d, sugar: bool = True) -> str:
    prefix = f"@{d.label} " if d.label else ""
    if isinstance(d, Halting):
        return f"{prefix}! {render_multiterm(d.pattern, sugar, 'Z')} ;"
    if not d.subs:
        return f"{prefix}{render_rule(d.head, sugar)} ;"
    lines = [f"{prefix}{render_rule(d.head, sugar)} :"]
    for sub in d.subs:
        sub_prefix = f"@{sub.label} " if sub.label else ""
        lines.append(f"    {sub_prefix}{render_rule(sub, sugar)} .")
    return "\n".join(lines)


def render_program(p: Program, sugar: bool = True) -> str:
    return "".join(render_definition(d, sugar) + "\n" for d in p.definitions)


def is_symbol_name(name: str) -> bool:
    """True if ``name`` lexes as a single symbol token."""
    return (bool(name) and not is_variable_name(name) and not name.startswith("@")
            and not name.startswith("--") and name != WITNESS_SYMBOL_NAME
            and not any(c.isspace() or c in RESERVED for c in name))
