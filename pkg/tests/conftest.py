import numpy as np
import pytest

from kpdkit import datasets

_ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def rank_one_h():
    return datasets.rank_one_4x2x2x3()


@pytest.fixture(scope="session")
def nonexact_h():
    return datasets.nonexact_4x2x2x3()


@pytest.fixture(scope="session")
def two_basin_h():
    return datasets.two_basin_4x2x2x3()


@pytest.fixture(scope="session")
def collar():
    return datasets.collar16()
