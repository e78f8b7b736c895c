"""One test per acceptance criterion, at full size and fixed seeds.

Each test prints a PASS/FAIL line; the lines are repeated in the summary
section at the end of the run.
"""
import time

import pytest

from cu_kit import acceptance

SEED = 0
_results: dict = {}


def _run(number):
    if number not in _results:
        _results[number] = acceptance.CRITERIA[number - 1](SEED)
    return _results[number]


@pytest.mark.parametrize("number", range(1, 9))
def test_criterion(number, report_line):
    t = time.perf_counter()
    r = _run(number)
    report_line(f"{r.line()} ({time.perf_counter() - t:.1f}s)")
    assert r.passed, r.detail


def test_criterion_9_determinism(report_line):
    t = time.perf_counter()
    first = acceptance.canonical_json([_run(n) for n in range(1, 9)])
    r = acceptance.criterion_9(first, SEED)
    report_line(f"{r.line()} ({time.perf_counter() - t:.1f}s)")
    assert r.passed, r.detail
