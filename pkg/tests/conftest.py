import numpy as np
import pytest

from betaforge.rng import RngStream


@pytest.fixture
def rng():
    return RngStream(20240611, 0)


@pytest.fixture
def nprng():
    return np.random.default_rng(12345)
