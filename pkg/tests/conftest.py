import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE = {}  # criterion number -> (title, [outcomes])


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    n, title = mark.args
    entry = ACCEPTANCE.setdefault(n, (title, []))
    if report.when == "call" or report.failed:
        entry[1].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, results = ACCEPTANCE[n]
        status = "PASS" if results and all(results) else "FAIL"
        terminalreporter.write_line(f"{status}  {n:2d}. {title}")
