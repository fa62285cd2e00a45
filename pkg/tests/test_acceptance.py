"""Every acceptance criterion at its stated tolerance.

Each test prints one PASS/FAIL line (visible without ``-s``). Run alone with
``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import sys

import pytest

from rarewave.acceptance import Suite


@pytest.fixture(scope="module")
def suite():
    return Suite()


# admissibility inspects every run made by the others, so it goes last
@pytest.mark.parametrize("number", sorted(Suite.CHECKS))
def test_criterion(number, suite, capsys):
    res = suite.check(number)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail


if __name__ == "__main__":
    results = list(Suite().run_all())
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
