"""Shared fixtures and the acceptance-line reporter.

Acceptance tests record one human-readable PASS/FAIL line per criterion;
the terminal-summary hook prints them after the normal pytest report so the
verdict survives output capture.
"""

from __future__ import annotations

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
