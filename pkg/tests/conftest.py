"""Pytest plumbing: collects acceptance verdict lines and prints them last."""

from __future__ import annotations

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    """Queue one verdict line for the end-of-run summary."""
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance checks")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
