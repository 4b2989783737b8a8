import math

import pytest

from ladder_cavity.dressed_model import BareParams

_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion, then assert."""

    def report(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def fig2_base():
    w = 500 / math.sqrt(2)
    return BareParams(gamma32=1.0, gamma21=1.0, kappa=1e-3, g1=5.001, g2=5.0, omega1=w, omega2=w)


@pytest.fixture
def moderate():
    """Validity-regime point with <n> well below one."""
    return BareParams(gamma32=1.0, gamma21=0.7, kappa=0.8, g1=1.3, g2=0.4, omega1=100.0, omega2=60.0)
