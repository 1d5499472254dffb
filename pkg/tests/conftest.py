"""Shared pytest wiring: make tests importable and print one line per
acceptance criterion in the terminal summary."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


def record_criterion(name: str, detail: str) -> None:
    """Called by acceptance tests after their assertions pass."""
    _ACCEPTANCE_RESULTS.append((name, "PASS", detail))


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    if report.failed:
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE_RESULTS.append((name, "FAIL", ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in _ACCEPTANCE_RESULTS:
        suffix = f"  {detail}" if detail else ""
        terminalreporter.write_line(f"{outcome}  {name}{suffix}")
