"""Pseudo-odwrotności Moore'a–Penrose'a trzema drogami.

- ``pinv_decell``: wzór Decella przez współczynniki wielomianu
  charakterystycznego M = ZZᵀ; rozgałęzia się tylko na m współczynnikach.
- ``pinv_greedy_projector``: wcześniejsza metoda, zachłanny wybór
  wierszy Y z Z i odwrócenie YYᵀ przez Cayleya–Hamiltona; zwraca rzutnik Z†Z.
- ``pinv_svd_oracle``: referencja przez SVD.

Rdzenie obliczeń są zapisane względem obiektu ``ops`` (arytmetyka + test
zera), dzięki czemu ten sam kod biegnie na liczbach zmiennoprzecinkowych i na
śledzonych skalarach audytu GJ (``sketchlab.lowrank.gjtrace``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Protocol, Sequence

import numpy as np
from loguru import logger

from sketchlab.core.errors import ContractError, ParameterError
from sketchlab.lowrank.linalg import DEFAULT_RANK_TOL, DenseMatrix, as_dense, svd

DEFAULT_COEFF_TOL = 1e-10
# rząd szumu zaokrągleń w c_{r+1} przy ‖Z‖_F = 1 i m ≤ 10
DEFAULT_COEFF_FLOOR = 1e-12


class ArithOps(Protocol):
    """Minimalna arytmetyka macierzowa, której potrzebują rdzenie pinv."""

    def matmul(self, X: Any, Y: Any) -> Any: ...
    def trace(self, X: Any) -> Any: ...
    def identity(self, size: int) -> Any: ...
    def zeros(self, shape: tuple[int, int]) -> Any: ...
    def add_diagonal(self, X: Any, c: Any) -> Any: ...
    def scale(self, c: Any, X: Any) -> Any: ...
    def is_zero(self, c: Any, scale: Any = None) -> bool: ...


class FloatOps:
    """Arytmetyka float64.

    Test zera: |c| ≤ tol, a ze skalą |c| ≤ max(tol·|scale|, floor).
    """

    def __init__(self, tol: float = DEFAULT_COEFF_TOL, floor: float = 0.0) -> None:
        if tol <= 0:
            raise ParameterError(f"Tolerancja musi być > 0, otrzymano {tol}")
        if floor < 0:
            raise ParameterError(f"Próg szumu musi być ≥ 0, otrzymano {floor}")
        self.tol = tol
        self.floor = floor

    def matmul(self, X: DenseMatrix, Y: DenseMatrix) -> DenseMatrix:
        return X @ Y

    def trace(self, X: DenseMatrix) -> float:
        return float(np.trace(X))

    def identity(self, size: int) -> DenseMatrix:
        return np.eye(size)

    def zeros(self, shape: tuple[int, int]) -> DenseMatrix:
        return np.zeros(shape)

    def add_diagonal(self, X: DenseMatrix, c: float) -> DenseMatrix:
        out = X.copy()
        out[np.diag_indices_from(out)] += c
        return out

    def scale(self, c: float, X: DenseMatrix) -> DenseMatrix:
        return c * X

    def is_zero(self, c: float, scale: float | None = None) -> bool:
        bound = self.tol if scale is None else max(self.tol * abs(scale), self.floor)
        return abs(c) <= bound


@dataclass(frozen=True)
class CharPoly:
    """det(λI − M) = λ^m + c_1 λ^{m−1} + ⋯ + c_m."""

    coeffs: tuple[float, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def evaluate(self, lam: float) -> float:
        value = 1.0
        for c in self.coeffs:
            value = value * lam + c
        return value


# ── Rdzenie generyczne ────────────────────────────────────


def faddeev_leverrier(M: Any, ops: ArithOps) -> list[Any]:
    """Rekurencja Faddeeva–LeVerriera: M₁ = M, c_i = −tr(M_i)/i, M_{i+1} = M(M_i + c_i I)."""
    size = M.shape[0]
    coeffs: list[Any] = []
    Mi = M
    for i in range(1, size + 1):
        c = -ops.trace(Mi) / i
        coeffs.append(c)
        if i < size:
            Mi = ops.matmul(M, ops.add_diagonal(Mi, c))
    return coeffs


def _horner(M: Any, coeffs: Sequence[Any], r: int, ops: ArithOps) -> Any:
    """M^{r−1} + c_1 M^{r−2} + ⋯ + c_{r−1} I."""
    P = ops.identity(M.shape[0])
    for j in range(1, r):
        P = ops.add_diagonal(ops.matmul(M, P), coeffs[j - 1])
    return P


def decell_kernel(Z: Any, ops: ArithOps) -> tuple[Any, int]:
    """Z† według Decella; zwraca (Z†, r), gdzie r to rząd odczytany ze współczynników.

    Skan c_1, c_2, … zatrzymuje się na pierwszym c_i zerowym względem c_{i−1}
    (c_0 = 1); to jedyne rozgałęzienia, co najwyżej m testów. W arytmetyce
    dokładnej c_i ≠ 0 dla i ≤ rank(Z) i c_i = 0 dalej, więc r = rank(Z).
    """
    m, cols = Z.shape
    M = ops.matmul(Z, Z.T)
    coeffs = faddeev_leverrier(M, ops)
    r = 0
    for i in range(1, m + 1):
        if ops.is_zero(coeffs[i - 1], coeffs[i - 2] if i > 1 else 1.0):
            break
        r = i
    if r == 0:
        return ops.zeros((cols, m)), 0
    P = _horner(M, coeffs, r, ops)
    return ops.scale(-(1 / coeffs[r - 1]), ops.matmul(Z.T, P)), r


def cayley_hamilton_parts(M: Any, ops: ArithOps) -> tuple[Any, Any] | None:
    """Rozkład M⁻¹ = −(1/c_r)·P, P = M^{r−1} + ⋯ + c_{r−1} I; None gdy c_r = 0.

    Dzielenie zostaje na koniec, więc iloczyny z P pozostają wielomianami.
    """
    coeffs = faddeev_leverrier(M, ops)
    r = M.shape[0]
    if ops.is_zero(coeffs[r - 1]):
        return None
    return _horner(M, coeffs, r, ops), coeffs[r - 1]


def greedy_kernel(Z: Any, ops: ArithOps) -> tuple[Any, list[int]]:
    """Z†Z = Yᵀ(YYᵀ)⁻¹Y, gdzie Y to zachłannie wybrane niezależne wiersze Z.

    Wiersz i jest dołączany, gdy det(Y'Y'ᵀ) ≠ 0 dla Y' = Y + wiersz i; każdy
    zestaw kandydatów daje osobny predykat, stąd do 2^m różnych testów.
    """
    m, cols = Z.shape
    selected: list[int] = []
    for i in range(m):
        candidate = [*selected, i]
        Y = Z[candidate, :]
        coeffs = faddeev_leverrier(ops.matmul(Y, Y.T), ops)
        # det(Y'Y'ᵀ) = ±c_r; test zera nie zależy od znaku
        if not ops.is_zero(coeffs[len(candidate) - 1]):
            selected = candidate
    if not selected:
        return ops.zeros((cols, cols)), selected
    Y = Z[selected, :]
    parts = cayley_hamilton_parts(ops.matmul(Y, Y.T), ops)
    if parts is None:
        # wybór wierszy gwarantuje det ≠ 0 dla tego samego Y
        raise ContractError("Macierz Grama wybranych wierszy okazała się osobliwa")
    P, c_r = parts
    return ops.scale(-(1 / c_r), ops.matmul(Y.T, ops.matmul(P, Y))), selected


# ── API float64 ───────────────────────────────────────────


def unit_scaled(Z: DenseMatrix) -> tuple[DenseMatrix, float]:
    """Skaluje Z do jednostkowej normy Frobeniusa; zwraca (Z/‖Z‖, ‖Z‖)."""
    norm = float(np.linalg.norm(Z))
    if norm == 0.0:
        return Z, 1.0
    return Z / norm, norm


def char_poly_coeffs(M) -> CharPoly:
    """Współczynniki det(λI − M) rekurencją Faddeeva–LeVerriera."""
    M = as_dense(M, "M")
    if M.shape[0] != M.shape[1]:
        raise ParameterError(f"M musi być kwadratowa, otrzymano {M.shape}")
    return CharPoly(coeffs=tuple(float(c) for c in faddeev_leverrier(M, FloatOps())))


def pinv_decell(
    Z, coeff_tol: float = DEFAULT_COEFF_TOL, coeff_floor: float = DEFAULT_COEFF_FLOOR
) -> DenseMatrix:
    """Z† wzorem Decella.

    Z jest najpierw skalowane do ‖Z‖_F = 1, a wynik przeskalowany z powrotem:
    (cZ)† = Z†/c. Rząd r to ostatnie i przed pierwszym c_{i+1} spełniającym
    |c_{i+1}| ≤ max(coeff_tol·|c_i|, coeff_floor).

    Iloraz c_i/c_{i−1} jest co najmniej λ_min/i (λ to wartości własne ZZᵀ po
    skalowaniu), a c_r to iloczyn r wartości własnych. Rząd jest odczytany
    poprawnie, gdy σ_min²/‖Z‖²_F ≫ m·coeff_tol i c_r ≫ coeff_floor. Dla m ≤ 4
    i pozostałych σ porównywalnych ze sobą obejmuje to σ_min/σ_max do 1e-3.
    Poza tym zakresem najmniejsze σ wypadają z odczytanego rzędu i wynik nie
    jest już Z†.
    """
    Z = as_dense(Z, "Z")
    scaled, norm = unit_scaled(Z)
    result, r = decell_kernel(scaled, FloatOps(coeff_tol, coeff_floor))
    logger.debug(f"pinv_decell {Z.shape}: r = {r}")
    return result / norm


def inverse_cayley_hamilton(M, det_tol: float = DEFAULT_COEFF_TOL) -> DenseMatrix:
    """Odwrotność macierzy kwadratowej przez twierdzenie Cayleya–Hamiltona."""
    M = as_dense(M, "M")
    if M.shape[0] != M.shape[1]:
        raise ParameterError(f"M musi być kwadratowa, otrzymano {M.shape}")
    scaled, norm = unit_scaled(M)
    parts = cayley_hamilton_parts(scaled, FloatOps(det_tol))
    if parts is None:
        raise ContractError(f"Macierz {M.shape} jest (numerycznie) osobliwa")
    P, c_r = parts
    return -P / (c_r * norm)


def pinv_greedy_projector(Z, det_tol: float = DEFAULT_COEFF_TOL) -> DenseMatrix:
    """Rzutnik Z†Z metodą zachłannego wyboru wierszy (wiersze od najniższego indeksu)."""
    Z = as_dense(Z, "Z")
    scaled, _ = unit_scaled(Z)
    projector, selected = greedy_kernel(scaled, FloatOps(det_tol))
    logger.debug(f"pinv_greedy_projector {Z.shape}: wybrane wiersze {selected}")
    return projector


def pinv_svd_oracle(Z, rank_tol: float = DEFAULT_RANK_TOL) -> DenseMatrix:
    """Referencyjne Z† = V Σ⁻¹ Uᵀ po zachowanych wartościach osobliwych."""
    Z = as_dense(Z, "Z")
    res = svd(Z, rank_tol)
    return (res.V / res.sigma) @ res.U.T


def penrose_defects(Z, P) -> tuple[float, float, float, float]:
    """Względne residua czterech tożsamości Penrose'a: ZPZ=Z, PZP=P, (ZP)ᵀ=ZP, (PZ)ᵀ=PZ."""
    Z = as_dense(Z, "Z")
    P = as_dense(P, "P")

    def rel(diff: DenseMatrix, ref: DenseMatrix) -> float:
        num = float(np.linalg.norm(diff))
        return num / max(float(np.linalg.norm(ref)), np.finfo(float).tiny) if num else 0.0

    ZP, PZ = Z @ P, P @ Z
    return (
        rel(ZP @ Z - Z, Z),
        rel(PZ @ P - P, P),
        rel(ZP.T - ZP, ZP),
        rel(PZ.T - PZ, PZ),
    )
