import warnings

import pytest
from hypothesis import settings

from effcap.errors import CancellationWarning

settings.register_profile("repo", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("repo")


@pytest.fixture
def quiet():
    """Silence expected cancellation warnings inside a test."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CancellationWarning)
        yield


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for the terminal summary, then assert."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, passed, detail):
        lines.append((number, f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}: {detail}"))
        assert passed, detail

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
