import numpy as np
from hypothesis import strategies as st

from qubolin.qubo import QuboInstance


@st.composite
def instances(draw, n_min=1, n_max=6, lo=-10, hi=10, density=None):
    n = draw(st.integers(n_min, n_max))
    q = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = draw(st.integers(lo, hi))
            q[i][j] = q[j][i] = v
    c = draw(st.lists(st.integers(lo, hi), min_size=n, max_size=n))
    return QuboInstance.from_lists(q, c, name="h")
