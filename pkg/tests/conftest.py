import os

import pytest

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def golden_path(name):
    return os.path.join(GOLDEN, name)


def read_golden(name):
    with open(golden_path(name), encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture
def golden():
    return read_golden


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance_report():
    def report(number, ok, detail, elapsed):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f} s) {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
