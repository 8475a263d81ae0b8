import pytest

from squeezebell.fock import Encoding
from squeezebell.kernels import solve_critical_squeezing
from squeezebell.schemes import dr_table, sr_table

# filled by test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture(scope="session")
def r_dr():
    return solve_critical_squeezing(Encoding.DR)


@pytest.fixture(scope="session")
def r_sr():
    return solve_critical_squeezing(Encoding.SR)


@pytest.fixture(scope="session")
def dr26(r_dr):
    return dr_table(r_dr, cap=26)


@pytest.fixture(scope="session")
def sr26(r_sr):
    return sr_table(0.0, r_sr, r_sr, cap=26)[0]
