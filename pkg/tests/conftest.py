import pytest

_LINES = []


@pytest.fixture
def report():
    """Record one acceptance verdict line; all lines are repeated in the summary."""

    def _report(label, ok, detail=""):
        line = f"{label}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
        _LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
