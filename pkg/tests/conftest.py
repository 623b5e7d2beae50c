from pathlib import Path

import pytest

from spidernet.graph import parse_graph

DATA = Path(__file__).parent / "data"

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def triangle():
    return parse_graph((DATA / "triangle.txt").read_text())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
