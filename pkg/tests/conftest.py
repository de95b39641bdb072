import numpy as np
import pytest


def symmetric(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) * scale
    return (a + a.T) / 2.0


def binary_symmetric(rng, n, p=0.5, zero_diagonal=False):
    upper = rng.random((n, n)) < p
    a = np.triu(upper, int(zero_diagonal))
    a = a + np.triu(a, 1).T
    return a.astype(float)


def random_permutation_matrix(rng, n):
    p = np.zeros((n, n))
    p[np.arange(n), rng.permutation(n)] = 1.0
    return p


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
