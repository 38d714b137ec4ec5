"""Collect the acceptance PASS/FAIL lines and repeat them after the run."""

from __future__ import annotations

import re

_VERDICT = re.compile(r"^(PASS|FAIL) \S+:")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            lines.extend(line for line in rep.capstdout.splitlines() if _VERDICT.match(line))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
