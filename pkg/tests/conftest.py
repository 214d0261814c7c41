from __future__ import annotations

import pytest
from helpers import ACCEPTANCE_LINES, linux_env

from modguard.pep import EnvironmentProfile


@pytest.fixture
def env310() -> EnvironmentProfile:
    return linux_env()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
