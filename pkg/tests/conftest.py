from __future__ import annotations

import pytest

_LINES: dict[int, str] = {}


@pytest.fixture
def record():
    """Store a criterion result so the summary can print one line per criterion."""

    def _record(result):
        _LINES[result.number] = result.line()
        print(result.line())
        return result

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_LINES):
        terminalreporter.write_line(_LINES[number])
