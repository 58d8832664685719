"""End-to-end acceptance checks, one test per criterion, at the stated tolerances.

Each test prints a single PASS/FAIL line; the lines are repeated in the
terminal summary so they are visible without ``-s``.
"""

import pytest

from szego_lab.acceptance import CRITERIA, run_criterion

RESULTS = []


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number):
    result = run_criterion(number, seed=0)
    RESULTS.append(result)
    print(result.line())
    assert result.passed, result.details
    assert result.within_budget, f"{result.seconds:.1f}s over the {result.budget_seconds}s budget"
