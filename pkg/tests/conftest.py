import numpy as np
import pytest

from zocopt import RngStream


@pytest.fixture
def rng():
    return RngStream(12345)


@pytest.fixture
def gen(rng):
    return rng.generator


def norm(x):
    return float(np.linalg.norm(x))
