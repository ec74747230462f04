"""Collects the one-line acceptance verdicts and prints them after the run."""
import pytest

ACCEPTANCE_LINES = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    def add(number, ok, text):
        line = "[%s] criterion %d: %s" % ("PASS" if ok else "FAIL", number, text)
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok
    return add
