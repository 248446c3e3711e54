"""Strata zastępcza L̂_ε (proxy loss) liczona wprost, w małej skali.

Kroki: B = A(SA)†(SA); dla każdego k-podzbioru P_i wektorów bazowych
Z_i = (BBᵀ)^q B P_i; wybór Z_i minimalizującego ‖B − Z_i Z_i† B‖_F²;
wynik ‖A − ZZ†B‖_F². Podzbiory przeglądane leksykograficznie.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations, islice

import numpy as np
from loguru import logger

from sketchlab.core.errors import FeasibilityError, ParameterError
from sketchlab.lowrank import sketch as sk
from sketchlab.lowrank.linalg import DenseMatrix, as_dense, frob_norm_sq
from sketchlab.lowrank.pinv import DEFAULT_COEFF_TOL, pinv_decell
from sketchlab.lowrank.scw import require_unit_norm, sketch_product

DEFAULT_ENUM_CAP = 100_000
RANK_DROP_TOL = 1e-12


def default_q(epsilon: float, d: int, constant: float = 1.0) -> int:
    """q = ⌈(c/ε)·ln(d/ε)⌉, co najmniej 1."""
    if not 0 < epsilon <= 1:
        raise ParameterError(f"epsilon musi leżeć w (0, 1], otrzymano {epsilon}")
    if d < 1:
        raise ParameterError(f"d musi być ≥ 1, otrzymano {d}")
    return max(1, math.ceil(constant / epsilon * math.log(d / epsilon)))


@dataclass(frozen=True)
class ProxyParams:
    epsilon: float
    q: int
    enum_cap: int = DEFAULT_ENUM_CAP
    orthonormalize: bool = True
    """Ortonormalizacja iteratów potęgowych (ta sama przestrzeń kolumn, stabilniej numerycznie)."""

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon musi być > 0, otrzymano {self.epsilon}")
        if self.q < 1:
            raise ParameterError(f"q musi być ≥ 1, otrzymano {self.q}")
        if self.enum_cap < 1:
            raise ParameterError(f"enum_cap musi być ≥ 1, otrzymano {self.enum_cap}")

    @classmethod
    def for_problem(cls, epsilon: float, d: int, constant: float = 1.0, **kwargs) -> "ProxyParams":
        return cls(epsilon=epsilon, q=default_q(epsilon, d, constant), **kwargs)


@dataclass(frozen=True)
class ProxyResult:
    loss: float
    subset: tuple[int, ...]
    """Wybrany podzbiór kolumn (indeksy wektorów bazowych)."""
    selection_residual: float
    """‖B − ZZ†B‖_F² dla wybranego Z."""
    subsets_checked: int


# ── Pomocnicze ────────────────────────────────────────────


def _pinv(Z: DenseMatrix) -> DenseMatrix:
    """Z† wzorem Decella, licząc po krótszym wymiarze: Z† = ((Zᵀ)†)ᵀ."""
    if Z.shape[1] == 0 or Z.shape[0] == 0:
        return np.zeros((Z.shape[1], Z.shape[0]))
    if Z.shape[0] > Z.shape[1]:
        return pinv_decell(Z.T, DEFAULT_COEFF_TOL).T
    return pinv_decell(Z, DEFAULT_COEFF_TOL)


def _orthonormal_basis(Y: DenseMatrix) -> DenseMatrix:
    if Y.shape[1] == 0:
        return Y
    Q, R = np.linalg.qr(Y)
    diag = np.abs(np.diag(R))
    top = float(diag.max(initial=0.0))
    if top == 0.0:
        return Q[:, :0]
    return Q[:, diag > RANK_DROP_TOL * top]


def _power_iterate(B: DenseMatrix, subset: tuple[int, ...], params: ProxyParams) -> DenseMatrix:
    Y = B[:, list(subset)]
    if params.orthonormalize:
        Y = _orthonormal_basis(Y)
    for _ in range(params.q):
        Y = B @ (B.T @ Y)
        if params.orthonormalize:
            Y = _orthonormal_basis(Y)
    return Y


def _project(Z: DenseMatrix, B: DenseMatrix) -> DenseMatrix:
    return Z @ (_pinv(Z) @ B)


def _best_in_range(B: DenseMatrix, subsets: list[tuple[int, tuple[int, ...]]], params: ProxyParams):
    best: tuple[float, int, DenseMatrix] | None = None
    for index, subset in subsets:
        Z = _power_iterate(B, subset, params)
        residual = frob_norm_sq(B - _project(Z, B))
        if best is None or residual < best[0]:
            best = (residual, index, Z)
    return best


# ── API ───────────────────────────────────────────────────


def proxy_loss_details(
    S: sk.SparseSketch | DenseMatrix,
    A,
    k: int,
    params: ProxyParams,
    jobs: int = 1,
) -> ProxyResult:
    """Pełny wynik L̂_ε razem z wybranym podzbiorem.

    Przy ``jobs > 1`` podzbiory są dzielone na ciągłe bloki między wątki, a
    redukcja po parze (residuum, indeks) daje ten sam wybór co przegląd
    sekwencyjny.
    """
    A = as_dense(A)
    require_unit_norm(A)
    d = A.shape[1]
    if not 1 <= k <= d:
        raise ParameterError(f"k musi spełniać 1 ≤ k ≤ d = {d}, otrzymano {k}")
    total = math.comb(d, k)
    if total > params.enum_cap:
        raise FeasibilityError(f"C({d}, {k}) = {total} przekracza enum_cap = {params.enum_cap}")
    if jobs < 1:
        raise ParameterError(f"jobs musi być ≥ 1, otrzymano {jobs}")

    SA = sketch_product(S, A)
    B = A @ (_pinv(SA) @ SA)

    indexed = list(enumerate(combinations(range(d), k)))
    if jobs == 1:
        candidates = [_best_in_range(B, indexed, params)]
    else:
        chunk = math.ceil(total / jobs)
        blocks = [indexed[i : i + chunk] for i in range(0, total, chunk)]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            candidates = list(pool.map(lambda block: _best_in_range(B, block, params), blocks))
    residual, index, Z = min((c for c in candidates if c is not None), key=lambda c: (c[0], c[1]))
    subset = next(islice(combinations(range(d), k), index, None))

    loss = frob_norm_sq(A - _project(Z, B))
    logger.debug(f"proxy_loss: podzbiór {subset}, residuum {residual:.3e}, L̂ = {loss:.6g}")
    return ProxyResult(loss=loss, subset=subset, selection_residual=residual, subsets_checked=total)


def proxy_loss(S: sk.SparseSketch | DenseMatrix, A, k: int, params: ProxyParams, jobs: int = 1) -> float:
    return proxy_loss_details(S, A, k, params, jobs).loss
