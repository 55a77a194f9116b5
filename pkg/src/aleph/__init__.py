"""Interpreter, static analyzer and command-line tools for the ℵ-calculus,
a declarative reversible term-rewriting language."""

from .analyzer import (
    HALT,
    CheckReport,
    Conflict,
    DuplicateLabel,
    RuleId,
    RuleTable,
    build_rule_table,
    check_ambiguity,
    check_linearity,
    check_program,
    pattern_overlap,
)
from .engine import (
    Active,
    Engine,
    HaltFinal,
    HaltInitial,
    RunResult,
    Stall,
    Trace,
    apply_rule,
    match_set,
    render_trace,
    run,
    step,
)
from .parser import (
    GroundnessError,
    ParseError,
    Program,
    parse_multiterm,
    parse_program,
    parse_term,
    render_program,
)
from .terms import Seq, Sym, Var, numeral, render_multiterm, render_term, term_equal
from .unify import Bindings, UnboundVariable, pattern_variables, substitute, unify, unify_sequence

__version__ = "0.1.0"
