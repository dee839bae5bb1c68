import itertools
import os
from math import prod

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def brute_sigma(values, k):
    """sigma_k by summing over all k-subsets (test oracle)."""
    return float(sum(prod(sub) for sub in itertools.combinations(values, k)))


def brute_mu(values, k):
    """mu_{i,k}: sigma_k over subsets avoiding index i."""
    n = len(values)
    return np.array([brute_sigma([values[j] for j in range(n) if j != i], k) for i in range(n)])


def random_symmetric(rng, n, scale=1.0):
    M = rng.normal(size=(n, n)) * scale
    return 0.5 * (M + M.T)


def lorentz_boost(n, rapidity, axis=1):
    """Boost of R^{n+2}_1 mixing x_0 with x_axis."""
    R = np.eye(n + 2)
    ch, sh = np.cosh(rapidity), np.sinh(rapidity)
    R[0, 0] = R[axis, axis] = ch
    R[0, axis] = R[axis, 0] = sh
    return R


def random_rotation(rng, dim):
    Q, R = np.linalg.qr(rng.normal(size=(dim, dim)))
    return Q * np.sign(np.diag(R))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
