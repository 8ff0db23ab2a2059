import math

import pytest

from dbtunnel.core import BarrierSystem


@pytest.fixture
def resonant_system():
    # k = q = 1 at E = 1, phi = pi/2, so L - phi = 0 exactly
    return BarrierSystem(v0=2.0, w=2.0, d=math.pi / 2)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Collects one summary line per acceptance criterion."""
    def report(number, passed, text):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {text}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
