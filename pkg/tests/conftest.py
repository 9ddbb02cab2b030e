import numpy as np
import pytest

from focktoeplitz.field import make_grid
from focktoeplitz.fock import FockBasis


@pytest.fixture(scope="session")
def grid():
    return make_grid(16.0, 256)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(16.0, 64)


@pytest.fixture(scope="session")
def basis40():
    return FockBasis(1.0, 40)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
