import numpy as np
import pytest

SEED = 20260809


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(SEED))
