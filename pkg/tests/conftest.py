import pytest

import hbvm
from hbvm import _core


@pytest.fixture(params=sorted(_core.BACKENDS))
def backend(request):
    """Run the test once per available kernel backend."""
    previous = _core.backend_name()
    hbvm.set_backend(request.param)
    yield request.param
    hbvm.set_backend(previous)


# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda l: int(l.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
