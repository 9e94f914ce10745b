from __future__ import annotations

import pytest

from qhsmm import build_example_process, build_poisson_process


@pytest.fixture(scope="session")
def example():
    return build_example_process(2.0, 1.0)


@pytest.fixture(scope="session")
def poisson():
    return build_poisson_process(1.0)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
