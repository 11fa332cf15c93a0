"""The eleven acceptance criteria at their stated tolerances and time budgets.

Each test prints a single PASS/FAIL line (shown even when output capture is on).
"""
import pytest

from qmfinv.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", [n for n, _, _ in CRITERIA], ids=[f"c{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(number, capsys):
    result = run_criterion(number, "full")
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
    assert result.in_budget, f"took {result.seconds:.1f}s, budget {result.budget}s"
