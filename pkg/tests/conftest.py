import numpy as np
import pytest

from clockring import ProblemShape, SweepSchedule


@pytest.fixture
def rng():
    return np.random.default_rng(20240911)


@pytest.fixture(scope="session")
def desk_shape():
    return ProblemShape(2, 1, 1)


@pytest.fixture(scope="session")
def desk_identity_schedule(desk_shape):
    return SweepSchedule(desk_shape)
