import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def rel_err(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(b), 1e-300)
