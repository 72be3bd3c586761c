"""The acceptance criteria at their stated tolerances, one line per criterion."""

import pytest

from tasep_pgf.acceptance import CRITERIA, run_criterion


@pytest.mark.slow
@pytest.mark.parametrize("cid", sorted(CRITERIA))
def test_criterion(cid, capsys):
    result = run_criterion(cid)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
