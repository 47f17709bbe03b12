"""One test per acceptance criterion; each prints a PASS/FAIL line.

Criteria 1 and 2 assert reference values that a correct solver cannot reach.
Those two tests fail on purpose.
"""
import pytest

from qubolin import acceptance


@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(number, capsys):
    result = acceptance.run_criterion(acceptance.CRITERIA[number - 1])
    with capsys.disabled():
        print()
        print(result.line())
        for d in result.details[:12]:
            print(f"    {d}")
    if result.passed is None:
        pytest.skip("declared not reproduced")
    assert result.passed, "\n".join(result.details)
