import re

import pytest

CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[CRITERIA] = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion and return whether it passed."""
    def record(k, passed, detail):
        line = f"CRITERION {k}: {'PASS' if passed else 'FAIL'} {detail}"
        request.config.stash[CRITERIA][k] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(CRITERIA, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])
