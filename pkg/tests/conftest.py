import pytest

from betaapprox.algebraic import certify_garsia
from betaapprox.expansion import BetaContext

# Lines recorded by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def sqrt2():
    return BetaContext.from_certificate(certify_garsia("x^2-2"), label="sqrt2")


@pytest.fixture(scope="session")
def tribo():
    return BetaContext.from_certificate(certify_garsia("x^3-2x-2"), label="x3-2x-2")


@pytest.fixture(scope="session")
def golden():
    return BetaContext.from_polynomial("x^2-x-1", label="golden")


@pytest.fixture(scope="session")
def b15():
    return BetaContext.from_value("1.5", label="1.5")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
