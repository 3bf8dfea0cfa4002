import pytest

_RESULTS: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance verdict; the summary hook prints them all."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> bool:
        _RESULTS.append((number, title, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {number}. {title}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_RESULTS):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {number:>2}. {title}: {detail}")
