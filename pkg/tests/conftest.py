import pytest

from hypermajority import _backend

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(params=_backend.available())
def backend(request):
    """Run the test once per available kernel implementation."""
    with _backend.using(request.param):
        yield request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
