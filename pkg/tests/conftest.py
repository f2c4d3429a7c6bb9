import pytest

# criterion number -> (passed, summary), filled in by test_acceptance.py
ACCEPTANCE = {}


def record(number, passed, summary):
    ACCEPTANCE[number] = (bool(passed), summary)
    print(f"{'PASS' if passed else 'FAIL'} criterion {number}: {summary}")


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, summary = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {summary}")
