import numpy as np
import pytest

from quenchsim import GridSpec, assemble_matrix, principal_eigenpair


@pytest.fixture(scope="session")
def grid41():
    return GridSpec(41)


@pytest.fixture(scope="session")
def op41(grid41):
    return assemble_matrix(grid41, 0.6)


@pytest.fixture(scope="session")
def pair41(op41):
    return principal_eigenpair(op41)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240917)
