import pytest

ACCEPTANCE: list[str] = []


@pytest.fixture
def record():
    """Log one acceptance line and return whether it passed."""

    def log(number: int, title: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE.append(f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
        print(ACCEPTANCE[-1])
        return passed

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
