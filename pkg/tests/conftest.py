"""Shared pytest plumbing: collects acceptance-criterion verdict lines.

The acceptance tests append one "criterion NN [PASS|FAIL] ..." line each via
the ``acceptance_report`` fixture; the terminal-summary hook replays those
lines after the run so they are visible even when pytest captures stdout.
"""

import pytest

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report() -> list[str]:
    """Append verdict lines here; they are echoed in the terminal summary."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
