import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fluxquant import PAPER_PARAMS, make_basis  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def params():
    return PAPER_PARAMS


@pytest.fixture(scope="session")
def basis(params):
    return make_basis(params, 120)


@pytest.fixture
def report():
    """Collect one summary line per acceptance criterion."""

    def _report(label, ok, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
