"""Shared fixtures and the per-criterion PASS/FAIL summary."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# criterion id -> list of (passed, detail)
CRITERIA: dict[int, list[tuple[bool, str]]] = {}
TITLES: dict[int, str] = {}


class CriterionLog:
    def __init__(self, number: int, title: str):
        self.number = number
        TITLES[number] = title
        CRITERIA.setdefault(number, [])

    def record(self, passed: bool, detail: str = "") -> None:
        CRITERIA[self.number].append((bool(passed), detail))


@pytest.fixture
def criterion():
    return CriterionLog


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        results = CRITERIA[n]
        ok = bool(results) and all(p for p, _ in results)
        notes = "; ".join(f"{'ok' if p else 'FAIL'}: {d}" for p, d in results if d)
        tr.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {TITLES[n]}" + (f" ({notes})" if notes else ""))
