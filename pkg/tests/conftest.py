import pytest

ACCEPTANCE_LINES = []


def record(label, passed, detail=""):
    ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}".rstrip())
    return passed


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
