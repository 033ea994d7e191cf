import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

warnings.filterwarnings("ignore", message=".*TBB.*")

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_depths(Y):
    """Peel non-dominated sets straight from the definition (1-based)."""
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    depth = np.zeros(n, dtype=int)
    left = set(range(n))
    j = 0
    while left:
        j += 1
        front = [
            a for a in left
            if not any(np.all(Y[b] <= Y[a]) and np.any(Y[b] < Y[a]) for b in left if b != a)
        ]
        for a in front:
            depth[a] = j
        left -= set(front)
    return depth


def brute_query_depth(Y, depth, q):
    q = np.asarray(q, dtype=float)
    hits = [depth[i] for i in range(len(Y)) if np.all(q <= Y[i]) and np.any(q < Y[i])]
    return min(hits) if hits else int(depth.max()) + 1
