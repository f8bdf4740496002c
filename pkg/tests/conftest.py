import pytest

ACCEPTANCE_RESULTS = {}


@pytest.fixture
def criterion(request):
    """Record a pass/fail line for an acceptance criterion."""

    def record(number, title):
        ACCEPTANCE_RESULTS[number] = (title, request.node)
        return number

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        for number, (title, node) in ACCEPTANCE_RESULTS.items():
            if node is item:
                ACCEPTANCE_RESULTS[number] = (title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, status = ACCEPTANCE_RESULTS[number]
        if not isinstance(status, str):
            status = "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
