import pytest

_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test outcome decides PASS or FAIL."""
    def record(number: int, title: str, detail: str = ""):
        _ACCEPTANCE[number] = [title, detail, request.node.nodeid]

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        for entry in _ACCEPTANCE.values():
            if entry[2] == item.nodeid and len(entry) == 3:
                entry.append("PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, detail, _, *status = _ACCEPTANCE[number]
        verdict = status[0] if status else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {number:2d}: {title}" + (f"  ({detail})" if detail else ""))
