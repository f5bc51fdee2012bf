"""One test per acceptance criterion; each prints its PASS/FAIL line."""
import pytest

from wpa.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("key", list(CRITERIA))
def test_criterion(key, capsys):
    result = run_criterion(key)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
