import pytest

from delta_forge.construct import construct_mollifier
from delta_forge.mollifier import builtin


@pytest.fixture(scope="session")
def constructed_q3():
    return construct_mollifier(3, 10, 1e-8)


@pytest.fixture(scope="session")
def constructed_q1():
    return construct_mollifier(1, 6, 1e-8)


@pytest.fixture(params=["sinc", "lorentzian", "gaussian"])
def named(request):
    return builtin(request.param)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    rows = acceptance_log.lines()
    if rows:
        terminalreporter.section("acceptance criteria")
        for row in rows:
            terminalreporter.write_line(row)
