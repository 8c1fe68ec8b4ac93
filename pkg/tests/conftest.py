import numpy as np
import pytest
from hypothesis import settings

from kdv_ist.grid import MomentumGrid
from kdv_ist.potentials import PotentialSpec, sample
from kdv_ist.profile import uniform_grid

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid256():
    return MomentumGrid(20.0, 256)


@pytest.fixture(scope="session")
def soliton_profile():
    return sample(PotentialSpec("soliton", {"kappa": 1.0}), uniform_grid(-20.0, 20.0, 0.05))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from _acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for label in sorted(RESULTS, key=lambda s: int(s[2:])):
            terminalreporter.write_line(RESULTS[label])
