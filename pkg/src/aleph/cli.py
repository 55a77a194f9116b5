"""Command-line front end: ``aleph run|trace|check|repl|verify``.

Exit codes:

    0  ok
    1  I/O or parse error
    2  ambiguity conflict
    3  strict linearity failure
    4  stall (or another invalid evaluation state)
    5  fuel or recursion budget exhausted
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence, TextIO

from .analyzer import CheckReport, DuplicateLabel, RuleTable, check_program
from .engine import Engine, EngineError, FuelExhausted, Stall, render_trace
from .parser import ParseError, Program, parse_multiterm, parse_program
from .terms import render_multiterm

EXIT_OK, EXIT_PARSE, EXIT_AMBIGUOUS, EXIT_STRICT, EXIT_STALL, EXIT_FUEL = range(6)

BUNDLED_PROGRAMS = Path(__file__).parent / "corpus" / "programs"
DEFAULT_MAX_DEPTH = 100_000
# frames used by the worker thread and the engine entry point themselves
_FRAME_SLACK = 64
REPL_FUEL = 1_000_000


class LoadError(Exception):
    pass


@dataclass
class Flags:
    no_sugar: bool = False
    strict: bool = False
    fuel: int | None = None
    seed: int | None = None
    machine: bool = False
    force: bool = False
    max_depth: int = DEFAULT_MAX_DEPTH

    @property
    def sugar(self) -> bool:
        return not self.no_sugar


def resolve_path(path: str) -> Path:
    """Find ``path`` as given, then under each ``ALEPH_PATH`` entry, then
    among the bundled example programs."""
    p = Path(path)
    if p.exists():
        return p
    if not p.is_absolute():
        dirs = [d for d in os.environ.get("ALEPH_PATH", "").split(os.pathsep) if d]
        for d in dirs + [str(BUNDLED_PROGRAMS)]:
            candidate = Path(d) / p
            if candidate.exists():
                return candidate
    raise LoadError(f"{path}: no such file (searched ALEPH_PATH and bundled programs)")


def load_program(paths: Sequence[str], sugar: bool = True) -> Program:
    program = Program((), "")
    for path in paths:
        resolved = resolve_path(path)
        try:
            text = resolved.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise LoadError(f"{path}: {exc}") from None
        part = parse_program(text, numeral_sugar=sugar, source=str(path))
        program = Program(program.definitions + part.definitions,
                          "+".join(filter(None, [program.source_name, str(path)])))
    return program


def _deep_call(fn: Callable, depth: int):
    """Run ``fn`` in a thread with a large stack and a recursion limit of
    ``depth`` Python frames (plus a little slack)."""
    result: dict = {}

    def target():
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(depth + _FRAME_SLACK)
        try:
            result["value"] = fn()
        except BaseException as exc:  # re-raised in the caller
            result["error"] = exc
        finally:
            sys.setrecursionlimit(old)

    old_size = threading.stack_size()
    threading.stack_size(min(1 << 30, max(64 << 20, depth * 4096)))
    try:
        worker = threading.Thread(target=target)
        worker.start()
        worker.join()
    finally:
        threading.stack_size(old_size)
    if "error" in result:
        raise result["error"]
    return result["value"]


@dataclass
class Outcome:
    code: int
    stdout: list[str] = field(default_factory=list)
    stderr: list[str] = field(default_factory=list)


def _load_and_check(paths: Sequence[str], flags: Flags) -> tuple[RuleTable | None, CheckReport | None, Outcome]:
    try:
        program = load_program(paths, flags.sugar)
        table, report = check_program(program, strict=flags.strict)
    except (ParseError, LoadError, DuplicateLabel) as exc:
        return None, None, Outcome(EXIT_PARSE, stderr=[f"error: {exc}"])
    return table, report, Outcome(report.exit_code)


def cmd_check(paths: Sequence[str], flags: Flags) -> Outcome:
    if not paths:
        return Outcome(EXIT_PARSE, stderr=["error: check needs at least one program file"])
    table, report, outcome = _load_and_check(paths, flags)
    if report is None:
        return outcome
    if flags.machine:
        outcome.stdout.append(report.to_json())
    else:
        outcome.stdout += [f.render() for f in report.findings]
        errors = sum(f.severity == "error" for f in report.findings)
        warnings = len(report.findings) - errors
        outcome.stdout.append(f"{len(table.entries) // 2} computational, "
                              f"{len(table.halting)} halting; {errors} error(s), {warnings} warning(s)")
    return outcome


def evaluate(table: RuleTable, term_text: str, flags: Flags, show_trace: bool,
             warnings: Sequence[str] = ()) -> Outcome:
    try:
        terms = parse_multiterm(term_text, numeral_sugar=flags.sugar, source="<term>")
    except ParseError as exc:
        return Outcome(EXIT_PARSE, stderr=[f"error: {exc}"])
    engine = Engine(table)
    doc: dict = {"input": render_multiterm(terms, flags.sugar), "warnings": list(warnings)}
    out = Outcome(EXIT_OK)
    try:
        result = _deep_call(lambda: engine.run(terms, fuel=flags.fuel, seed=flags.seed),
                            flags.max_depth)
    except Stall as stall:
        out.code = EXIT_FUEL if isinstance(stall, FuelExhausted) else EXIT_STALL
        if show_trace and stall.trace is not None:
            out.stdout += render_trace(stall.trace, flags.sugar)
        out.stdout += stall.render(flags.sugar)
        doc["stall"] = {"reason": stall.reason,
                        "at": render_multiterm(stall.terms, flags.sugar),
                        "bindings": {k: render_multiterm([v], flags.sugar)
                                     for k, v in stall.bindings.items()},
                        "location": list(stall.location)}
        doc["steps"] = None
        if stall.trace is not None:
            doc["root_states"] = [render_multiterm(s, flags.sugar) for s in stall.trace.states]
    except EngineError as exc:
        out.code = EXIT_STALL
        out.stdout.append(f"invalid state: {exc}")
        doc["stall"] = {"reason": "invalid-state", "detail": str(exc)}
        doc["steps"] = None
    except RecursionError:
        out.code = EXIT_FUEL
        out.stdout.append(f"error: nesting deeper than --max-depth {flags.max_depth}")
        doc["stall"] = {"reason": "recursion-limit"}
        doc["steps"] = None
    else:
        if show_trace:
            out.stdout += render_trace(result.trace, flags.sugar)
        else:
            out.stdout.append(render_multiterm(result.final, flags.sugar))
        doc["output"] = render_multiterm(result.final, flags.sugar)
        doc["steps"] = result.steps
        doc["root_states"] = [render_multiterm(s, flags.sugar) for s in result.trace.states]
        doc["warnings"] += result.warnings
        out.stderr += [f"warning: {w}" for w in result.warnings]
    if flags.machine:
        doc["exit_code"] = out.code
        out.stdout = [json.dumps(doc, sort_keys=True, ensure_ascii=False)]
    return out


def cmd_run(paths: Sequence[str], term_text: str | None, flags: Flags,
            show_trace: bool = False) -> Outcome:
    if term_text is None:
        return Outcome(EXIT_PARSE, stderr=["error: --term is required"])
    table, report, outcome = _load_and_check(paths, flags)
    if report is None:
        return outcome
    findings = [f.render() for f in report.findings]
    if report.exit_code != EXIT_OK and not flags.force:
        outcome.stderr += findings + ["error: static check failed (use --force to run anyway)"]
        return outcome
    result = evaluate(table, term_text, flags, show_trace, warnings=findings)
    if not flags.machine:
        result.stderr = findings + result.stderr
    return result


class Session:
    """REPL state: the loaded rule table and display settings."""

    def __init__(self, paths: Sequence[str], flags: Flags):
        self.paths = list(paths)
        self.flags = flags
        if self.flags.fuel is None:
            self.flags.fuel = REPL_FUEL
        self.show_trace = False
        self.table: RuleTable | None = None
        self.report: CheckReport | None = None
        self.done = False

    def reload(self) -> list[str]:
        table, report, outcome = _load_and_check(self.paths, self.flags)
        if table is None:
            return outcome.stderr
        self.table, self.report = table, report
        return []

    def execute(self, line: str) -> list[str]:
        line = line.strip()
        if not line or line.startswith("--"):
            return []
        if line.startswith(":"):
            return self.directive(line)
        if self.table is None:
            errors = self.reload()
            if errors:
                return errors
        out = evaluate(self.table, line, self.flags, self.show_trace)
        return out.stdout + out.stderr

    def directive(self, line: str) -> list[str]:
        cmd, _, arg = line.partition(" ")
        arg = arg.strip()
        if cmd in (":quit", ":q"):
            self.done = True
            return []
        if cmd == ":trace":
            if arg not in ("on", "off"):
                return ["usage: :trace on|off"]
            self.show_trace = arg == "on"
            return [f"trace {arg}"]
        if cmd == ":check":
            errors = self.reload()
            if errors:
                return errors
            lines = [f.render() for f in self.report.findings]
            return lines or ["no findings"]
        if cmd == ":load":
            if not arg:
                return ["usage: :load <path>"]
            previous = list(self.paths)
            self.paths.append(arg)
            errors = self.reload()
            if errors:
                self.paths = previous
                return errors
            return [f"loaded {arg}"]
        return [f"unknown directive {cmd} (try :trace, :check, :load, :quit)"]

    def loop(self, stdin: TextIO, stdout: TextIO, prompt: str = "aleph> "):
        for line in self.reload():
            print(line, file=stdout)
        interactive = stdin.isatty()
        while not self.done:
            if interactive:
                stdout.write(prompt)
                stdout.flush()
            line = stdin.readline()
            if not line:
                break
            try:
                lines = self.execute(line)
            except Exception as exc:  # a bad line never ends the session
                lines = [f"error: {exc}"]
            for text in lines:
                print(text, file=stdout)


def cmd_repl(paths: Sequence[str], flags: Flags, stdin: TextIO = sys.stdin,
             stdout: TextIO = sys.stdout) -> int:
    Session(paths, flags).loop(stdin, stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("files", nargs="*", help="program files (.al)")
    common.add_argument("--term", help="multiterm to evaluate")
    common.add_argument("--no-sugar", action="store_true", help="disable decimal numerals")
    common.add_argument("--strict", action="store_true", help="make linearity findings fatal")
    common.add_argument("--fuel", type=int, help="maximum number of steps")
    common.add_argument("--seed", type=int, help="randomise sub-rule order with this seed")
    common.add_argument("--machine", action="store_true", help="emit JSON")
    common.add_argument("--force", action="store_true", help="run despite failed checks")
    common.add_argument("--max-depth", type=int, default=DEFAULT_MAX_DEPTH,
                        help="recursion guard for nested evaluation")

    parser = argparse.ArgumentParser(prog="aleph", description=__doc__.split("\n")[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter,
                                     epilog=__doc__.split("\n", 2)[2])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="evaluate a multiterm")
    sub.add_parser("trace", parents=[common], help="evaluate and print the step trace")
    sub.add_parser("check", parents=[common], help="static checks only")
    sub.add_parser("repl", parents=[common], help="interactive session")
    sub.add_parser("verify", help="replay the bundled golden traces")
    return parser


def _emit(outcome: Outcome, stdout: TextIO, stderr: TextIO) -> int:
    for line in outcome.stdout:
        print(line, file=stdout)
    for line in outcome.stderr:
        print(line, file=stderr)
    return outcome.code


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None,
         stderr: TextIO | None = None, stdin: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        from .corpus import corpus_verify
        results = corpus_verify()
        for r in results:
            print(r.render(), file=stdout)
        return EXIT_OK if all(r.ok for r in results) else EXIT_STALL
    if args.fuel is not None and args.fuel <= 0:
        print("error: --fuel must be positive", file=stderr)
        return EXIT_PARSE
    flags = Flags(args.no_sugar, args.strict, args.fuel, args.seed, args.machine,
                  args.force, args.max_depth)
    if args.command == "check":
        return _emit(cmd_check(args.files, flags), stdout, stderr)
    if args.command in ("run", "trace"):
        return _emit(cmd_run(args.files, args.term, flags, show_trace=args.command == "trace"),
                     stdout, stderr)
    return cmd_repl(args.files, flags, stdin or sys.stdin, stdout)


if __name__ == "__main__":
    sys.exit(main())
