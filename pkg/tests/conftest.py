import pytest

_lines: list[str] = []


@pytest.fixture
def acceptance_log():
    """Collects acceptance pass/fail lines for the terminal summary."""

    def log(line: str) -> None:
        print(line)
        _lines.append(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if _lines:
        terminalreporter.section("acceptance criteria")
        for line in _lines:
            terminalreporter.write_line(line)
