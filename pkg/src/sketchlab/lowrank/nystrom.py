"""Szkicowana aproksymacja Nyströma macierzy PSD: AS(SᵀAS)†(AS)ᵀ.

Szkic jest tu kolumnowy, S ∈ ℝ^{n×r}, i trzymany gęsto; opcjonalna maska
ogranicza niezera do ustalonych pozycji.
"""

from __future__ import annotations

import numpy as np
from loguru import logger

from sketchlab.core.errors import ContractError, ParameterError
from sketchlab.core.rng import Stream, generator
from sketchlab.lowrank.linalg import DenseMatrix, as_dense, frob_norm_sq
from sketchlab.lowrank.pinv import pinv_decell
from sketchlab.lowrank.scw import require_unit_norm

PSD_TOL = 1e-8


def require_psd(A: DenseMatrix, tol: float = PSD_TOL) -> None:
    if A.shape[0] != A.shape[1]:
        raise ContractError(f"A musi być kwadratowa, otrzymano {A.shape}")
    asym = float(np.max(np.abs(A - A.T), initial=0.0))
    if asym > tol:
        raise ContractError(f"A nie jest symetryczna (max |A − Aᵀ| = {asym:.3g})")
    floor = float(np.linalg.eigvalsh((A + A.T) / 2.0)[0])
    if floor < -tol:
        raise ContractError(f"A nie jest dodatnio półokreślona (λ_min = {floor:.3g})")


def _masked(S: DenseMatrix, mask) -> DenseMatrix:
    if mask is None:
        return S
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != S.shape:
        raise ParameterError(f"Maska {mask.shape} nie pasuje do szkicu {S.shape}")
    return np.where(mask, S, 0.0)


def nystrom_approx(S, A, mask=None) -> DenseMatrix:
    """Aproksymacja rzędu ≤ r; pseudo-odwrotność liczona wzorem Decella."""
    A = as_dense(A)
    S = _masked(as_dense(S, "S"), mask)
    require_psd(A)
    if S.shape[0] != A.shape[0]:
        raise ParameterError(f"Niezgodne wymiary: S ma {S.shape[0]} wierszy, A jest {A.shape}")
    AS = A @ S
    core = pinv_decell(S.T @ AS)
    approx = AS @ core @ AS.T
    # symetryzacja usuwa asymetrię rzędu błędu zaokrągleń
    return (approx + approx.T) / 2.0


def nystrom_loss(S, A, mask=None) -> float:
    """L(S, A) = ‖A − AS(SᵀAS)†(AS)ᵀ‖_F² dla ‖A‖_F = 1."""
    A = as_dense(A)
    require_unit_norm(A)
    return frob_norm_sq(A - nystrom_approx(S, A, mask))


def column_sketch(n: int, r: int, nnz: int, seed: int) -> tuple[DenseMatrix, np.ndarray]:
    """Losowy szkic n×r z nnz niezerami N(0,1) na losowych, ustalonych pozycjach.

    Zwraca (S, maska); maskę można przekazać dalej do ``nystrom_approx``.
    """
    if n < 1 or r < 1:
        raise ParameterError(f"Wymiary szkicu muszą być dodatnie, otrzymano {n}×{r}")
    if not 1 <= nnz <= n * r:
        raise ParameterError(f"nnz musi spełniać 1 ≤ nnz ≤ {n * r}, otrzymano {nnz}")
    rng = generator(seed, Stream.SKETCH_INIT, n, r)
    positions = rng.choice(n * r, size=nnz, replace=False)
    mask = np.zeros(n * r, dtype=bool)
    mask[positions] = True
    mask = mask.reshape(n, r)
    S = np.zeros((n, r))
    S[mask] = rng.standard_normal(nnz)
    logger.debug(f"column_sketch {n}×{r}: {nnz} niezer")
    return S, mask
