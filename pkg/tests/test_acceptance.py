"""Release gate: every criterion runs at its pinned budget and tolerance.

Each test prints its PASS/FAIL line (visible with ``pytest -s`` or on
failure); the CLI ``validate`` subcommand prints the same report.
"""

import pytest

from sgfsim.acceptance import CRITERIA, DEFAULT_SEED


@pytest.mark.parametrize("name,criterion", CRITERIA, ids=[name for name, _ in CRITERIA])
def test_criterion(name, criterion):
    result = criterion(DEFAULT_SEED)
    status = "PASS" if result.passed else "FAIL"
    print(f"[{status}] {result.name}: {result.detail}")
    assert result.passed, f"{result.name}: {result.detail}"
