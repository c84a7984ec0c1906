import time
from contextlib import contextmanager

import pytest

_results: list[tuple[str, bool, float, str]] = []


@contextmanager
def _criterion(name: str, budget: float):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        _results.append((name, False, time.perf_counter() - start, type(exc).__name__))
        raise
    elapsed = time.perf_counter() - start
    within = elapsed < budget
    _results.append((name, within, elapsed, "" if within else f"over {budget}s budget"))
    assert within, f"{name}: {elapsed:.2f}s exceeds {budget}s"


@pytest.fixture
def criterion():
    return _criterion


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, elapsed, note in _results:
        status = "PASS" if ok else "FAIL"
        suffix = f"  ({note})" if note else ""
        terminalreporter.write_line(f"[{status}] {name}  {elapsed:.3f}s{suffix}")
