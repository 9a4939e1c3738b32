import numpy as np
import pytest

from gibbstest.model import log_likelihood_ratio, markov_system

P0 = [[1 / 4, 1 / 2], [3 / 4, 1 / 2]]
P1 = [[2 / 3, 1 / 5], [1 / 3, 4 / 5]]

# one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def sys0():
    return markov_system(P0)


@pytest.fixture(scope="session")
def sys1():
    return markov_system(P1)


@pytest.fixture(scope="session")
def K(sys0, sys1):
    return log_likelihood_ratio(sys0, sys1)


@pytest.fixture(scope="session")
def symmetric_pair():
    """Two chains exchanged by relabelling the symbols 1 <-> 2."""
    t0 = np.array([[0.7, 0.4], [0.3, 0.6]])
    swap = np.array([[0, 1], [1, 0]])
    return markov_system(t0), markov_system(swap @ t0 @ swap)


@pytest.fixture
def record_acceptance():
    def record(number: int, text: str):
        ACCEPTANCE_LINES[number] = text
        print(text)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
