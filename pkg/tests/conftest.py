import numpy as np
import pytest

from dlorasim.phy import make_params

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def sf7():
    return make_params(7)


@pytest.fixture
def rng():
    return np.random.default_rng(20201028)


@pytest.fixture
def report():
    """Record a one-line acceptance verdict, shown in the terminal summary."""

    def _report(criterion: str, passed: bool, detail: str = ""):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
        print(_ACCEPTANCE_LINES[-1])

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
