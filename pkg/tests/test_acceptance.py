"""Acceptance criteria, one test and one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines; they are
also collected into the terminal summary.
"""

import pytest

from hillspec.verify import CHECKS, run_one

CRITERIA = [(i + 1, name, fn, limit) for i, (name, fn, limit) in enumerate(CHECKS)]
LINES: list[str] = []


@pytest.mark.parametrize("number, name, fn, limit", CRITERIA, ids=[c[1].replace(" ", "_") for c in CRITERIA])
def test_criterion(number, name, fn, limit):
    res = run_one(name, fn, limit)
    line = f"criterion {number:2d} {res.line()}"
    LINES.append(line)
    print(line)
    assert res.passed, res.detail


def pytest_terminal_summary_lines():
    return list(LINES)
