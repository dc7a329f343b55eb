"""Acceptance criteria 1-12 at full resolution, one summary line per criterion."""
import io
import time

import pytest

from frachardy import acceptance
from frachardy.cli import main

# wall-clock budgets in seconds
BUDGETS = {1: 10, 2: 10, 3: 1, 4: 30, 5: 120, 6: 300, 7: 60, 8: 600, 9: 180, 10: 5, 11: 120,
           12: 1200}
SUMMARY = []


def _record(number, name, passed, seconds, note=""):
    status = "PASS" if passed else "FAIL"
    line = f"[{status}] criterion {number:2d}: {name} ({seconds:.1f}s)"
    SUMMARY.append(line + (f"  {note}" if note else ""))
    print(line)


def _headline(details):
    keep = {k: v for k, v in details.items() if k != "reports"}
    text = repr(keep)
    return text if len(text) < 160 else text[:157] + "..."


@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(number):
    res = acceptance.run_criterion(number, level="full")
    within = res.seconds <= BUDGETS[number]
    _record(number, res.name, res.passed and within, res.seconds, _headline(res.details))
    assert res.passed, res.details
    assert within, f"took {res.seconds:.1f}s, budget {BUDGETS[number]}s"


def _selftest(tmp_path, workers):
    path = tmp_path / f"selftest_w{workers}.json"
    code = main(["selftest", "--workers", str(workers), "--out", str(path)], stdout=io.StringIO())
    return code, path.read_bytes()


def test_criterion_12_determinism(tmp_path):
    start = time.perf_counter()
    code1, out1 = _selftest(tmp_path, 1)
    code2, out2 = _selftest(tmp_path, 2)
    inner = acceptance.run_criterion(12, level="full", workers=1)
    seconds = time.perf_counter() - start
    passed = code1 == 0 and code2 == 0 and out1 == out2 and inner.passed
    _record(12, "worker count does not change results", passed and seconds <= BUDGETS[12], seconds,
            f"selftest json {len(out1)} bytes, identical={out1 == out2}")
    assert code1 == 0 and code2 == 0
    assert out1 == out2
    assert inner.passed
    assert seconds <= BUDGETS[12]
