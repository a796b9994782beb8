import pytest

_REPORT: list[str] = []


@pytest.fixture
def report():
    """Record a one-line acceptance verdict, shown in the terminal summary."""
    def record(criterion: str, ok: bool, detail: str = ""):
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f": {detail}" if detail else "")
        _REPORT.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
