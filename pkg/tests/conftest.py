import pytest

_RESULTS = []


@pytest.fixture
def criterion():
    """Record one acceptance line and fail the test when ``ok`` is false."""
    def check(number, title, ok, detail=""):
        _RESULTS.append((number, title, bool(ok), detail))
        assert ok, f"criterion {number} ({title}) failed: {detail}"
    return check


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(_RESULTS, key=lambda r: r[0]):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}: {detail}")
