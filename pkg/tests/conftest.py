import sys
from fractions import Fraction
from pathlib import Path

import pytest

from ergoforge.groups import FiniteGroup, GroupContext
from ergoforge.measures import FiniteAction

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def F1():
    return GroupContext.free(1)


@pytest.fixture
def F2():
    return GroupContext.free(2)


@pytest.fixture
def sym2():
    return FiniteGroup.symmetric(2)


@pytest.fixture
def sym3():
    return FiniteGroup.symmetric(3)


@pytest.fixture
def rot4(F1):
    """Rotation of 4 uniform atoms."""
    return FiniteAction(F1, [Fraction(1, 4)] * 4, [(1, 2, 3, 0)])


@pytest.fixture
def swap2(F1):
    return FiniteAction(F1, [Fraction(1, 2)] * 2, [(1, 0)])


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES):
            terminalreporter.write_line(line)
