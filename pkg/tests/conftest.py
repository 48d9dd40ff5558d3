import numpy as np
import pytest

from fsigsim.channel import PowerProfile


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_powers():
    def make(n, p=1.0, noise=1.0):
        return PowerProfile(np.full(n, p), noise)
    return make


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
