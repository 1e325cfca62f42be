import numpy as np
import pytest

from tslab.geometry import SpaceGrid, TimeLevels
from tslab.gridfn import HalfSpaceGrid


def make_grid(n, N, h, t_min, m, J):
    return HalfSpaceGrid(SpaceGrid(n, (N,) * n, h, (0.0,) * n), TimeLevels(t_min, m, J))


@pytest.fixture(scope="session")
def grid1():
    return make_grid(1, 64, 1 / 16, 1 / 16, 4, 16)


@pytest.fixture(scope="session")
def grid2():
    return make_grid(2, 16, 1 / 4, 1 / 16, 2, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
