"""Full-size acceptance criteria, one test each, at their stated tolerances.

Every test prints a single PASS/FAIL line; run with ``-s`` to see them.
"""
import pytest

from multcoal.acceptance import CRITERIA, AcceptanceRun

SEED = 1


@pytest.fixture(scope="module")
def suite():
    return AcceptanceRun(SEED)


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA),
                         ids=[f"{k:02d}_{CRITERIA[k].__name__.split('_', 1)[1]}" for k in sorted(CRITERIA)])
def test_criterion(suite, number):
    r = suite.criterion(number)
    print(r.line())
    assert r.passed, r.to_dict()
