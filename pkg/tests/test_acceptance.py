"""One test per acceptance criterion, each at its stated tolerance.

Every test prints a ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the terminal summary.
"""
import pytest

from anisomorrey.acceptance import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, acceptance_log):
    result = CRITERIA[number]()
    line = result.line()
    print(line)
    acceptance_log.append(line)
    assert result.passed, line
