import numpy as np
import pytest
from hypothesis import settings

from qubolin.qubo import QuboInstance

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def symmetric_instance(rng, n, lo=-10, hi=10, name="t"):
    q = np.zeros((n, n), dtype=np.int64)
    iu = np.triu_indices(n, 1)
    q[iu] = rng.integers(lo, hi + 1, size=len(iu[0]))
    q = q + q.T
    c = rng.integers(lo, hi + 1, size=n)
    return QuboInstance.from_lists(q.tolist(), c.tolist(), name=name)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
