import numpy as np
import pytest

from rydcav.qops import DensityMatrix, HilbertSpace, Operator


def random_density(space: HilbertSpace, rng) -> DensityMatrix:
    """Full-rank random state (Ginibre construction)."""
    d = space.dim
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = m @ m.conj().T
    return DensityMatrix(space, rho / rho.trace())


def random_hermitian(d, rng) -> np.ndarray:
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (m + m.conj().T)


def random_unitary(space: HilbertSpace, rng) -> Operator:
    d = space.dim
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(m)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return Operator(space, q)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
