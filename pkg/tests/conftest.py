import numpy as np
import pytest

from commexp.matform import make_pair


@pytest.fixture(scope="session")
def pauli_pair():
    return make_pair("pauli")


@pytest.fixture(scope="session")
def random_pair():
    return make_pair("random", 16, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
