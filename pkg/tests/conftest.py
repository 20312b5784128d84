import pytest

from cfeinstein import DigitSequence, boundary_data, convergents

ACCEPTANCE = []


def record(criterion, passed, detail):
    """Store one acceptance verdict; printed in the terminal summary."""
    ACCEPTANCE.append((criterion, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(ACCEPTANCE, key=lambda r: str(r[0])):
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def all3():
    return DigitSequence.periodic([3])


@pytest.fixture(scope="session")
def mixed():
    return DigitSequence.periodic([3, 4, 5])


@pytest.fixture(scope="session")
def b3(all3):
    return boundary_data(all3, 40)


@pytest.fixture(scope="session")
def bmix(mixed):
    return boundary_data(mixed, 40)


@pytest.fixture(scope="session")
def t3(all3):
    return convergents(all3, 10)
