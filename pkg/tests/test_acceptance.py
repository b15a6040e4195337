"""Acceptance suite: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v`` (the lines are repeated in the
terminal summary) or ``python3 tests/test_acceptance.py`` for the lines alone.
Tolerances are pinned in :mod:`slext.acceptance`.
"""

import pytest

from slext import acceptance

RESULTS = {}


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda c: c.__name__.removeprefix("criterion_"))
def test_criterion(criterion):
    result = criterion(acceptance.DEFAULT_SEED)
    RESULTS[result.number] = result
    print(result.line())
    for line in result.details:
        print("    " + line)
    assert result.passed, result.line()


def test_tolerances_are_pinned():
    assert acceptance.RESOLVENT_TOL == 1e-3
    assert acceptance.RATIO_BAND == (3.5, 4.5)
    assert acceptance.REGULARIZATION_TOL == 1e-10
    assert acceptance.CLOSED_FORM_TOL == 1e-12
    assert acceptance.KREIN_PARAMETER_TOL == 1e-10
    assert acceptance.INTERVAL_TOL == 1e-2
    assert acceptance.HERGLOTZ_TOL == 1e-10
    assert acceptance.SYMMETRY_TOL == 1e-12
    assert acceptance.NORMAL_FUNCTION_SLACK == 1e-8
    assert acceptance.KERNEL_EIGEN_TOL == 1e-2
    assert acceptance.ENERGY_TOL == 1e-4
    assert acceptance.RANK_TOL == 1e-8


if __name__ == "__main__":
    for res in acceptance.run_all():
        print(res.line())
