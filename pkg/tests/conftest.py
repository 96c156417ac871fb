import pytest

from momentgraph.fga import additive_context, multiplicative_context
from momentgraph.root_system import build_root_system

SMALL_TYPES = [("A", 1), ("A", 2), ("A", 3), ("B", 2), ("B", 3), ("C", 2), ("C", 3), ("D", 4), ("G2", 2)]
RANK2_TYPES = [("A", 2), ("B", 2), ("C", 2), ("G2", 2)]


@pytest.fixture
def a2():
    return build_root_system("A", 2)


@pytest.fixture
def b2():
    return build_root_system("B", 2)


@pytest.fixture
def a2_add(a2):
    return additive_context(a2)


@pytest.fixture
def a1_mult():
    return multiplicative_context(build_root_system("A", 1))


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
