import pytest

_RESULTS: dict[int, tuple[str, str]] = {}


@pytest.fixture
def record():
    """record(k, passed, detail) stores one acceptance line."""

    def _record(k, passed, detail=""):
        _RESULTS[k] = ("PASS" if passed else "FAIL", detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_RESULTS):
        status, detail = _RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {status}  {detail}")
