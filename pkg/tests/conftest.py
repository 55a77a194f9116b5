from __future__ import annotations

import pytest

from aleph.analyzer import build_rule_table
from aleph.corpus import PROGRAMS
from aleph.engine import Engine
from aleph.parser import parse_program

ACCEPTANCE_RESULTS: list[str] = []


def load(name: str):
    path = PROGRAMS / name
    return parse_program(path.read_text(encoding="utf-8"), source=name)


@pytest.fixture(scope="session")
def arith():
    return load("arith.al")


@pytest.fixture(scope="session")
def arith_table(arith):
    return build_rule_table(arith)


@pytest.fixture(scope="session")
def arith_engine(arith_table):
    return Engine(arith_table)


@pytest.fixture(scope="session")
def pairs_engine():
    return Engine(build_rule_table(load("pairs.al")))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
