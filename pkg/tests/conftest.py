"""Shared pytest plumbing.

The acceptance tests record one human-readable pass/fail line each; the
terminal-summary hook replays them after the run so the verdict survives
pytest's output capture.
"""

import pytest

_CRITERION_LINES = []


@pytest.fixture(scope="session")
def criterion_report():
    """Record `[PASS]/[FAIL] criterion NN: detail` and assert on the verdict."""

    def record(number: int, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:02d}: {detail}"
        _CRITERION_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_CRITERION_LINES):
        terminalreporter.write_line(line)
