import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.Generator(
        np.random.Philox(key=np.array([987654321, 0], dtype=np.uint64)))


def philox(seed, tag=0):
    return np.random.Generator(
        np.random.Philox(key=np.array([seed, tag], dtype=np.uint64)))
