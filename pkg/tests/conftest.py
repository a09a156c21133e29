import numpy as np
import pytest


_ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion, then assert."""
    def _report(number, name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}" + (
            f" ({detail})" if detail else "")
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line
    return _report


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
