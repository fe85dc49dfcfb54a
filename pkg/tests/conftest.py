import pytest

_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    criterion = item.get_closest_marker("criterion")
    if criterion is None:
        return
    failed_setup = report.when == "setup" and not report.passed
    if report.when == "call" or failed_setup:
        number, title = criterion.args
        _ACCEPTANCE[number] = (title, "PASS" if report.passed else "FAIL", report.duration)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, verdict, seconds = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{verdict}] criterion {number:>2}: {title} ({seconds:.1f}s)")
    passed = sum(v == "PASS" for _, v, _ in _ACCEPTANCE.values())
    terminalreporter.write_line(f"{passed}/{len(_ACCEPTANCE)} acceptance criteria passed")
