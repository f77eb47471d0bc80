import numpy as np
import pytest


def random_density(rng, dim, rank=None):
    """Random valid density matrix from a mixture of random pure states."""
    rank = rank or dim
    vecs = rng.normal(size=(rank, dim)) + 1j * rng.normal(size=(rank, dim))
    weights = rng.uniform(0.1, 1.0, size=rank)
    weights /= weights.sum()
    rho = sum(w * np.outer(v, v.conj()) / np.vdot(v, v)
              for w, v in zip(weights, vecs))
    return 0.5 * (rho + rho.conj().T)


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (a + a.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
