import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240311)


def random_density_direct(dim, rng):
    """Independent density-matrix generator for oracle-side computations."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian_direct(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2
