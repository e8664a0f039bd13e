import math

import pytest
from hypothesis import settings

from biphoton.emitters import EmitterPair, hybrid_levels

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def perpendicular_075():
    pair = EmitterPair(math.pi / 4, -math.pi / 4, 0.075)
    return pair, hybrid_levels(pair)


@pytest.fixture
def perpendicular_05():
    pair = EmitterPair(math.pi / 4, -math.pi / 4, 0.05)
    return pair, hybrid_levels(pair)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
