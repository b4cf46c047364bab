"""Acceptance reporting: one PASS/FAIL line per criterion at the end of the run."""
import pytest

_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title, limit = mark.args
    status = "PASS" if rep.passed else "FAIL"
    _results[number] = f"criterion {number:>2}: {status}  {title} ({rep.duration:.1f} s, limit {limit} s)"


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        terminalreporter.write_line(_results[number])
