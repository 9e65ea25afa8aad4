import math

import pytest

from sharpgrids.numberfield import power_basis_table, rational_table


@pytest.fixture(scope="session")
def q_table():
    return rational_table()


@pytest.fixture(scope="session")
def sqrt2():
    return power_basis_table([-2, 0, 1], math.sqrt(2))


@pytest.fixture(scope="session")
def cbrt2():
    return power_basis_table([-2, 0, 0, 1], 2 ** (1 / 3))


@pytest.fixture(scope="session")
def linear():
    return power_basis_table([-1, 1], 1.0)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, "rep_" + rep.when, rep)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in test_acceptance.RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
