"""Bundled example programs and golden traces.

A ``.case`` file looks like::

    program: arith.al
    input: + 3 2 ()
    compare: full          # or 'root' to check only unindented lines
    fuel: 10               # optional
    expect:
    ! + 3 2 ()
    | () 5 2 +  -- add-step
    ...

Expected lines use the trace format of :func:`aleph.engine.render_trace`,
followed by ``stall:``/``bindings:``/``location:`` lines when the run stalls.
Terms are compared structurally, so ``Z`` and ``0`` are interchangeable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from ..analyzer import build_rule_table
from ..engine import Engine, Stall, render_trace
from ..parser import ParseError, parse_multiterm, parse_program

ROOT = Path(__file__).parent
PROGRAMS = ROOT / "programs"
GOLDEN = ROOT / "golden"

_TERM_LINE = re.compile(r"^(\s*)([!|]) (.*?)(?:  -- (\S+))?\s*$")
_STALL_LINE = re.compile(r"^stall: (\S+) at (.*?)\s*$")
_BINDINGS_LINE = re.compile(r"^bindings: \{(.*)\}\s*$")


@dataclass(frozen=True)
class GoldenCase:
    name: str
    program: Path
    input: str
    expected: tuple[str, ...]
    compare: str = "full"
    fuel: int | None = None


@dataclass
class CaseResult:
    case: GoldenCase
    ok: bool
    detail: str = ""

    def render(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.case.name}" + (f": {self.detail}" if self.detail else "")


def load_case(path: Path) -> GoldenCase:
    header: dict[str, str] = {}
    expected: list[str] = []
    lines = path.read_text(encoding="utf-8").splitlines()
    for i, line in enumerate(lines):
        if line.strip() == "expect:":
            expected = [l for l in lines[i + 1:] if l.strip()]
            break
        if not line.strip() or line.startswith("#"):
            continue
        key, _, value = line.partition(":")
        header[key.strip()] = value.split("#", 1)[0].strip()
    program = (path.parent / header["program"]).resolve() if "/" in header["program"] \
        else PROGRAMS / header["program"]
    return GoldenCase(path.stem, program, header["input"], tuple(expected),
                      header.get("compare", "full"),
                      int(header["fuel"]) if "fuel" in header else None)


def load_cases(directory: Path = GOLDEN) -> list[GoldenCase]:
    return [load_case(p) for p in sorted(directory.glob("*.case"))]


def _normalize(line: str) -> str:
    m = _TERM_LINE.match(line)
    if m:
        indent, tag, text, rule = m.groups()
        try:
            text = " ".join(map(repr, parse_multiterm(text)))
        except ParseError:
            pass
        return f"{indent}{tag} {text}" + (f" -- {rule}" if rule else "")
    m = _STALL_LINE.match(line)
    if m:
        return f"stall: {m.group(1)} at {' '.join(map(repr, parse_multiterm(m.group(2))))}"
    m = _BINDINGS_LINE.match(line)
    if m:
        pairs = []
        for item in filter(None, (s.strip() for s in m.group(1).split(","))):
            name, _, value = item.partition("↦")
            pairs.append(f"{name.strip()}={parse_multiterm(value)!r}")
        return "bindings: " + ", ".join(pairs)
    return line.rstrip()


def golden_lines(case: GoldenCase) -> list[str]:
    """The engine's observable output for ``case``."""
    program = parse_program(case.program.read_text(encoding="utf-8"), source=case.program.name)
    engine = Engine(build_rule_table(program))
    try:
        result = engine.run(parse_multiterm(case.input), fuel=case.fuel)
    except Stall as stall:
        lines = render_trace(stall.trace) if stall.trace is not None else []
        lines += [l for l in stall.render() if not l.startswith("detail:")]
    else:
        lines = render_trace(result.trace)
    if case.compare == "root":
        lines = [l for l in lines if not l.startswith(" ")]
    return lines


def verify_case(case: GoldenCase) -> CaseResult:
    try:
        actual = golden_lines(case)
    except Exception as exc:
        return CaseResult(case, False, f"error: {exc}")
    for i, (want, got) in enumerate(zip(case.expected, actual)):
        if _normalize(want) != _normalize(got):
            return CaseResult(case, False, f"line {i + 1}: expected {want.strip()!r}, got {got.strip()!r}")
    if len(case.expected) != len(actual):
        return CaseResult(case, False, f"expected {len(case.expected)} lines, got {len(actual)}")
    return CaseResult(case, True)


def corpus_verify(directory: Path = GOLDEN) -> list[CaseResult]:
    return [verify_case(c) for c in load_cases(directory)]
