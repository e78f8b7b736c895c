import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

LINES = pytest.StashKey[list]()


@pytest.fixture
def report_line(request):
    """Record a line for the acceptance summary printed after the run."""
    lines = request.config.stash.setdefault(LINES, [])

    def record(text):
        print(text)
        lines.append(text)

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for text in lines:
            terminalreporter.write_line(text)
