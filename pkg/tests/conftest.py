"""Collect ``@pytest.mark.criterion`` outcomes and print one PASS/FAIL line each."""

_TITLES = {}
_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion this test checks")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _TITLES[item.nodeid] = mark.args


def pytest_runtest_logreport(report):
    key = _TITLES.get(report.nodeid)
    if key is None:
        return
    ok = _OUTCOMES.get(key, True)
    if report.failed or (report.when == "call" and report.skipped):
        ok = False
    _OUTCOMES[key] = ok


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title in sorted(_OUTCOMES, key=lambda k: k[0]):
        status = "PASS" if _OUTCOMES[(number, title)] else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {number:2d}: {title}")
