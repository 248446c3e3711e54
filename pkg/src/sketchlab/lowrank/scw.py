"""Aproksymacja niskiego rzędu przez szkic: SCW_k(S, A) = [AV]_k Vᵀ, V z SVD(SA)."""

from __future__ import annotations

import numpy as np

from sketchlab.core.errors import ContractError, ParameterError
from sketchlab.lowrank import sketch as sk
from sketchlab.lowrank.linalg import DEFAULT_RANK_TOL, DenseMatrix, as_dense, best_rank_k, frob_norm_sq, svd

ZERO_SKETCH_TOL = 1e-12
NORM_TOL = 1e-6


def sketch_product(S: sk.SparseSketch | DenseMatrix, A: DenseMatrix) -> DenseMatrix:
    """SA dla szkicu rzadkiego albo gęstej macierzy m×n."""
    if isinstance(S, sk.SparseSketch):
        return sk.apply(S, A)
    S = as_dense(S, "S")
    if S.shape[1] != A.shape[0]:
        raise ParameterError(f"Niezgodne wymiary: S ma {S.shape[1]} kolumn, A ma {A.shape[0]} wierszy")
    return S @ A


def scw(S: sk.SparseSketch | DenseMatrix, A, k: int, rank_tol: float = DEFAULT_RANK_TOL) -> DenseMatrix:
    """SCW_k(S, A); gdy SA jest (numerycznie) zerowe, zwraca macierz zerową n×d."""
    A = as_dense(A)
    SA = sketch_product(S, A)
    m, d = SA.shape
    if not 1 <= k <= min(m, d):
        raise ParameterError(f"k musi spełniać 1 ≤ k ≤ min(m, d) = {min(m, d)}, otrzymano {k}")
    if not np.any(A):
        raise ContractError("SCW wymaga ‖A‖_F > 0")
    if np.linalg.norm(SA) <= ZERO_SKETCH_TOL:
        return np.zeros_like(A)
    V = svd(SA, rank_tol).V
    return best_rank_k(A @ V, k, rank_tol) @ V.T


def require_unit_norm(A: DenseMatrix, name: str = "A") -> None:
    norm = float(np.linalg.norm(A))
    if abs(norm - 1.0) > NORM_TOL:
        raise ContractError(f"{name} musi mieć ‖{name}‖_F = 1 (±{NORM_TOL}), otrzymano {norm:.9g}")


def scw_loss(S: sk.SparseSketch | DenseMatrix, A, k: int, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """L(S, A) = ‖A − SCW_k(S, A)‖_F² dla znormalizowanego A."""
    A = as_dense(A)
    require_unit_norm(A)
    return frob_norm_sq(A - scw(S, A, k, rank_tol))


def mean_scw_loss(S: sk.SparseSketch | DenseMatrix, instances, k: int) -> float:
    """Średnia strata SCW po zbiorze instancji (zerowa lista → ParameterError)."""
    if not instances:
        raise ParameterError("Pusty zbiór instancji")
    return float(np.mean([scw_loss(S, A, k) for A in instances]))
