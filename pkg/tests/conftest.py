import numpy as np
import pytest

from vessel_lab.realization import random_regular, random_symmetric, trivial
from vessel_lab.solitons import soliton_classic, soliton_exp


@pytest.fixture(scope="session")
def exp1():
    return soliton_exp(1.0)


@pytest.fixture(scope="session")
def classic1():
    return soliton_classic(1.0)


@pytest.fixture(scope="session")
def triv():
    return trivial()


@pytest.fixture(scope="session")
def reg4():
    return random_regular(4, 7)


@pytest.fixture(scope="session")
def sym3():
    return random_symmetric(3, 2, normalized=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def crandn(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
