import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title = mark.args
        detail = "; ".join(v for k, v in item.user_properties if k == "detail")
        _CRITERIA[number] = (title, "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL"), detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, status, detail = _CRITERIA[n]
        line = f"criterion {n} [{status}] {title}"
        terminalreporter.write_line(line + (f" -- {detail}" if detail else ""))
