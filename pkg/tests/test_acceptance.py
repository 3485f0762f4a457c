"""Runs every built-in acceptance criterion at its stated tolerance.

Each test prints the criterion's PASS/FAIL line (run with -s or check the
captured output on failure).  The same checks back ``egotrack selftest``.
"""

import pytest

from egotrack.selftest import ALL_CRITERIA, check_determinism, run_all

assert len(ALL_CRITERIA) == 11


@pytest.mark.parametrize(
    "fn", ALL_CRITERIA, ids=[f"criterion-{i:02d}" for i in range(1, 12)]
)
def test_criterion(fn, tmp_path):
    res = fn(str(tmp_path)) if fn is check_determinism else fn()
    print(res.line())
    assert res.passed, res.line()


def test_selftest_catches_induced_regression():
    # Negative control: with ego compensation forced off, the dominance
    # criterion must report a failure rather than pass vacuously.
    results = run_all(disable_ego_compensation=True, only=6, echo=False)
    assert len(results) == 1
    assert not results[0].passed
