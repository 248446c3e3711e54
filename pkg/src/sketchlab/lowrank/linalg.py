"""Gęsta algebra liniowa: zwarte SVD (jednostronny Jacobi), najlepsza aproksymacja rzędu k, normy."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import TypeAlias

import numpy as np
from loguru import logger
from numpy.typing import NDArray

from sketchlab.core.errors import ConvergenceError, ParameterError

DenseMatrix: TypeAlias = NDArray[np.float64]

DEFAULT_RANK_TOL = 1e-8
JACOBI_MAX_SWEEPS = 100
JACOBI_TOL = 1e-12


def as_dense(A, name: str = "A") -> DenseMatrix:
    """Konwertuje wejście na macierz float64 i sprawdza niezmienniki DenseMatrix."""
    arr = np.asarray(A, dtype=np.float64)
    if arr.ndim != 2:
        raise ParameterError(f"{name} musi być macierzą 2D, otrzymano ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} zawiera wartości nieskończone lub NaN")
    return arr


@dataclass(frozen=True)
class SvdResult:
    """Zwarte SVD: ``A ≈ U · diag(sigma) · Vᵀ``."""

    U: DenseMatrix
    """n×r, kolumny ortonormalne."""
    sigma: NDArray[np.float64]
    """r wartości osobliwych, malejąco, każda > rank_tol."""
    V: DenseMatrix
    """d×r, kolumny ortonormalne."""

    @property
    def rank(self) -> int:
        return int(self.sigma.shape[0])

    def reconstruct(self) -> DenseMatrix:
        return (self.U * self.sigma) @ self.V.T

    def truncate(self, k: int) -> "SvdResult":
        """Zostawia k największych trójek (albo wszystkie, gdy k ≥ rank)."""
        k = min(k, self.rank)
        return SvdResult(U=self.U[:, :k], sigma=self.sigma[:k], V=self.V[:, :k])


# ── Jacobi ────────────────────────────────────────────────


@lru_cache(maxsize=64)
def _round_robin(p: int) -> tuple[tuple[NDArray[np.intp], NDArray[np.intp]], ...]:
    """Harmonogram turniejowy: każda runda to zbiór rozłącznych par kolumn.

    Pary w jednej rundzie są niezależne, więc cała runda obraca się naraz.
    """
    players = list(range(p)) + ([-1] if p % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        left, right = [], []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a < 0 or b < 0:
                continue
            left.append(min(a, b))
            right.append(max(a, b))
        rounds.append((np.array(left, dtype=np.intp), np.array(right, dtype=np.intp)))
        players = [players[0], players[-1], *players[1:-1]]
    return tuple(rounds)


def _one_sided_jacobi(W: DenseMatrix, max_sweeps: int) -> tuple[DenseMatrix, DenseMatrix, int]:
    """Ortogonalizuje kolumny W rotacjami Hestenesa.

    Zwraca (W·J, J, liczba_przebiegów), gdzie J jest ortogonalna, a kolumny W·J
    o normie powyżej progu szumu są wzajemnie ortogonalne z dokładnością JACOBI_TOL.
    """
    n_cols = W.shape[1]
    J = np.eye(n_cols)
    # ‖W‖_F nie zmienia się przy rotacjach; kolumny poniżej progu to szum zaokrągleń
    total = float(np.einsum("ij,ij->", W, W))
    column_floor = (JACOBI_TOL**2) * total
    schedule = _round_robin(n_cols)
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p, q in schedule:
            wp, wq = W[:, p], W[:, q]
            alpha = np.einsum("ij,ij->j", wp, wp)
            beta = np.einsum("ij,ij->j", wq, wq)
            gamma = np.einsum("ij,ij->j", wp, wq)
            active = (
                (np.abs(gamma) > JACOBI_TOL * np.sqrt(alpha * beta))
                & (np.minimum(alpha, beta) > column_floor)
            )
            if not np.any(active):
                continue
            rotated = True
            safe_gamma = np.where(active, gamma, 1.0)
            zeta = (beta - alpha) / (2.0 * safe_gamma)
            sign = np.where(zeta >= 0.0, 1.0, -1.0)
            t = sign / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = np.where(active, 1.0 / np.sqrt(1.0 + t * t), 1.0)
            s = np.where(active, c * t, 0.0)

            W[:, p], W[:, q] = c * wp - s * wq, s * wp + c * wq
            jp, jq = J[:, p], J[:, q]
            J[:, p], J[:, q] = c * jp - s * jq, s * jp + c * jq
        if not rotated:
            return W, J, sweep
    raise ConvergenceError(
        f"Jednostronny Jacobi nie zbiegł po {max_sweeps} przebiegach dla macierzy {W.shape}"
    )


def svd(A, rank_tol: float = DEFAULT_RANK_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> SvdResult:
    """Zwarte SVD jednostronnym Jacobim.

    Wartości osobliwe ≤ rank_tol są traktowane jak zero i odrzucane.
    Znak kolumn: największy co do modułu element każdej kolumny U jest dodatni.
    """
    A = as_dense(A)
    if rank_tol <= 0:
        raise ParameterError(f"rank_tol musi być > 0, otrzymano {rank_tol}")
    n, d = A.shape
    transpose = d > n
    work = (A.T if transpose else A).copy()

    if work.shape[1] == 0 or not np.any(work):
        return SvdResult(U=np.zeros((n, 0)), sigma=np.zeros(0), V=np.zeros((d, 0)))

    W, J, sweeps = _one_sided_jacobi(work, max_sweeps)
    norms = np.sqrt(np.einsum("ij,ij->j", W, W))
    order = np.argsort(-norms, kind="stable")
    keep = order[norms[order] > rank_tol]
    sigma = norms[keep]
    left = W[:, keep] / sigma
    right = J[:, keep]
    U, V = (right, left) if transpose else (left, right)

    # konwencja znaku: największy |u_ij| w kolumnie jest dodatni
    if sigma.size:
        pivots = np.argmax(np.abs(U), axis=0)
        flip = np.sign(U[pivots, np.arange(U.shape[1])])
        flip[flip == 0] = 1.0
        U = U * flip
        V = V * flip

    logger.debug(f"SVD {A.shape}: rząd {sigma.size}, przebiegi Jacobiego {sweeps}")
    return SvdResult(U=U, sigma=sigma, V=V)


# ── Aproksymacje i normy ──────────────────────────────────


def best_rank_k(A, k: int, rank_tol: float = DEFAULT_RANK_TOL) -> DenseMatrix:
    """Optymalna aproksymacja rzędu k: [A]_k = U_k Σ_k V_kᵀ."""
    if k < 1:
        raise ParameterError(f"k musi być ≥ 1, otrzymano {k}")
    return svd(A, rank_tol).truncate(k).reconstruct()


def frob_norm_sq(A) -> float:
    """‖A‖_F² = suma kwadratów elementów."""
    A = as_dense(A)
    return float(np.einsum("ij,ij->", A, A))


def numerical_rank(A, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    return svd(A, rank_tol).rank


def tail_energy(A, k: int, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """Podłoga Eckarta–Younga: Σ_{i>k} σ_i²."""
    sigma = svd(A, rank_tol).sigma
    return float(np.sum(sigma[k:] ** 2))
