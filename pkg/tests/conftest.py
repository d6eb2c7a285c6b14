import pytest

from ginibre_loops.loops import solve_all, solve_through
from ginibre_loops.moments import MomentEngine


@pytest.fixture(scope="session")
def table():
    """Every entry needed by the printed forms and the low-order moments."""
    return solve_through([(2, 1), (1, 2), (0, 3)])


@pytest.fixture(scope="session")
def engine(table):
    return MomentEngine(table)


@pytest.fixture(scope="session")
def table4():
    return solve_all(4)
