import numpy as np
import pytest

from adrpoison import synth_scenario


SMALL = {
    "customers": {"n": 6},
    "events": {"n_history": 8, "n_future": 10},
    "learner": {"eta": 0.05},
    "attack": {"horizon": 10, "max_iters": 400},
}


@pytest.fixture(scope="session")
def default_scenario():
    return synth_scenario(None, 0)


@pytest.fixture(scope="session")
def small_scenario():
    return synth_scenario(SMALL, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
