import numpy as np
import pytest
from hypothesis import settings

from gaudin_opers.bethe import BetheProblem
from gaudin_opers.rootdata import load_cartan

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def two_site():
    return BetheProblem(load_cartan("A1"), ((0.0, [1]), (2.0, [1])), (1,))


@pytest.fixture
def three_site():
    return BetheProblem(load_cartan("A1"), ((0.0, [1]), (1.0, [1]), (4.0, [1])), (1,))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
