"""Acceptance criteria at full methodology: 90 s runs, 15 s warm-up, 20 seeds.

Batches are cached under ``$RELAYSIM_CACHE`` (default ``.cache/acceptance`` in
the repository), shared with ``relaysim acceptance``. A cold cache means
roughly an hour of simulation on one core.
"""

import os
from pathlib import Path

import pytest

from relaysim.acceptance import CRITERIA, Grid

CACHE = os.environ.get("RELAYSIM_CACHE",
                       str(Path(__file__).resolve().parent.parent / ".cache" / "acceptance"))


@pytest.fixture(scope="module")
def grid():
    return Grid(cache_dir=CACHE)


@pytest.mark.parametrize("cid", list(CRITERIA))
def test_criterion(cid, grid, capsys):
    result = CRITERIA[cid](grid)
    with capsys.disabled():
        print(f"\n{result.id} {'PASS' if result.passed else 'FAIL'}  {result.detail}")
        for note in result.notes:
            print(f"    {note}")
    assert result.passed, result.detail
