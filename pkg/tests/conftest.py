import pytest
from mpmath import mp

CRITERIA_LINES = []


@pytest.fixture(autouse=True)
def restore_precision():
    """Each test starts from 30 digits and cannot leak a changed context."""
    saved = mp.prec
    mp.dps = 30
    yield
    mp.prec = saved


@pytest.fixture
def report_criterion():
    """Record one PASS/FAIL line; the lines are repeated in the terminal summary."""

    def record(number, passed, text):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} | {text}"
        print(line)
        CRITERIA_LINES.append(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
