import pytest

from delta_spectra.kernels import CouplingTriple
from delta_spectra.solver import GridSpec

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def impurity_half():
    return CouplingTriple.impurity(0.5)


@pytest.fixture(scope="session")
def default_spec():
    return GridSpec()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
