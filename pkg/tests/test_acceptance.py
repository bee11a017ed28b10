"""Acceptance gate: the eleven numbered criteria, one line each.

Run with -s (or read the captured output) to see the per-criterion
detail lines. Each criterion is a library function so the CLI selftest
subcommand runs exactly the same checks.
"""

import pytest

from reebflow.selftest import CRITERIA

IDS = [f"criterion-{i:02d}-{name.replace(' ', '-')}"
       for i, (name, _) in enumerate(CRITERIA, start=1)]


@pytest.mark.parametrize("number,name,func",
                         [(i, name, func)
                          for i, (name, func) in enumerate(CRITERIA, 1)],
                         ids=IDS)
def test_acceptance_criterion(number, name, func):
    detail = func()
    print(f"PASS {number:2d} {name}: {detail}")
