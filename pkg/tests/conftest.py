import pytest

VERDICTS: dict[int, str] = {}


@pytest.fixture
def verdict():
    """Record the PASS/FAIL line of an acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> bool:
        VERDICTS[number] = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        print(VERDICTS[number])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
