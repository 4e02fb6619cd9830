"""Acceptance suite: the ten full-scale checks, one pass/fail line each.

Run standalone with ``python3 tests/test_acceptance.py`` for just the lines.
"""

import pytest

from idtlab import verify

CHECKS = [
    verify.check_cube,
    verify.check_kite,
    verify.check_oracle,
    verify.check_monotone,
    verify.check_rippa,
    verify.check_musin,
    verify.check_linear,
    verify.check_weight_sign,
    verify.check_curvature,
    verify.check_minimal,
]


@pytest.mark.parametrize("check", CHECKS, ids=[c.__name__.removeprefix("check_") for c in CHECKS])
def test_criterion(check, capsys):
    result = check()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.details


if __name__ == "__main__":
    results = [check() for check in CHECKS]
    for r in results:
        print(r.line())
    raise SystemExit(0 if all(r.passed for r in results) else 1)
