import numpy as np
import pytest

from batchkrig import Kernel, conditional_block, fit


@pytest.fixture
def brownian():
    return Kernel("brownian")


@pytest.fixture
def prior_state(brownian):
    """The counter-example setup: no observations yet, d = 1."""
    return fit(brownian, dim=1)


@pytest.fixture
def pair_block(prior_state):
    """Conditional block of the batch x1 = 0.5, x2 = 1.0 on the prior."""
    return conditional_block(prior_state, [0.5, 1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_spd(rng, size):
    G = rng.standard_normal((size, size))
    return G @ G.T + size * np.eye(size)


# one PASS/FAIL line per acceptance criterion, printed after the run
_CRITERIA = []


@pytest.fixture
def criterion():
    def report(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        _CRITERIA.append(line)
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
