import numpy as np
import pytest

from qubot_sim.channels import ModelParams
from qubot_sim.hilbert import DensityMatrix


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def reference_params() -> ModelParams:
    """Γ/Δ = 1, γ/Δ = r/Δ = 1.5"""
    return ModelParams(gamma_dephasing=1.0, gamma_forget=1.5, recovery_rate=1.5)


def random_density_matrix(rng: np.random.Generator, dim: int) -> DensityMatrix:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


def random_matrix(rng: np.random.Generator, rows: int, cols: int = 0) -> np.ndarray:
    shape = (rows, cols or rows)
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(random_matrix(rng, dim))
    return q * (np.diag(r) / np.abs(np.diag(r)))
