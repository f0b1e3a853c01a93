import pytest

from bessellab import moments
from bessellab.moments import MomentCache


@pytest.fixture
def fresh_cache():
    """A private in-memory moment cache installed as the default."""
    previous = moments.default_cache()
    cache = MomentCache()
    moments.set_default_cache(cache)
    yield cache
    moments.set_default_cache(previous)


# one line per acceptance criterion, shown in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
