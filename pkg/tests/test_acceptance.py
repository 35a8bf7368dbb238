"""Acceptance gate: one PASS/FAIL line per numbered criterion.

Run under pytest, or directly with ``python tests/test_acceptance.py``.
Item 14 is diagnostic only and prints DIAG.
"""
import sys

import pytest

from dyadic import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number, capsys):
    c = acceptance.run(number)
    with capsys.disabled():
        print("\n" + c.line())
    assert c.passed is not False, c.details


if __name__ == "__main__":
    results = acceptance.run_all(echo=print)
    sys.exit(1 if any(c.passed is False for c in results) else 0)
