import pytest

_LINES = []


@pytest.fixture(scope="session")
def criterion_report():
    """Collects one summary line per acceptance criterion."""

    def record(number, passed, detail, soft=False):
        if passed:
            status = "PASS"
        else:
            status = "FLAG (soft)" if soft else "FAIL"
        _LINES.append((number, f"criterion {number:>2}: {status:<11} {detail}"))

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
