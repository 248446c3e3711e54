import numpy as np
import pytest

from sketchlab.lowrank.data import DatasetParams


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def unit_matrix(rng):
    """Losowa macierz Gaussa o normie Frobeniusa 1."""

    def make(n: int, d: int) -> np.ndarray:
        A = rng.standard_normal((n, d))
        return A / np.linalg.norm(A)

    return make


@pytest.fixture
def low_rank(rng):
    """Macierz n×d rzędu r z wartościami osobliwymi z [0.5, 1]."""

    def make(n: int, d: int, r: int, normalize: bool = False) -> np.ndarray:
        U, _ = np.linalg.qr(rng.standard_normal((n, r)))
        V, _ = np.linalg.qr(rng.standard_normal((d, r)))
        A = (U * rng.uniform(0.5, 1.0, size=r)) @ V.T
        return A / np.linalg.norm(A) if normalize else A

    return make


@pytest.fixture
def tiny_params() -> DatasetParams:
    return DatasetParams(n=12, d=6, k_true=2, noise_scale=0.1, count=10, split_train=6, trials=2, master_seed=7)
