"""Rzadka macierz szkicująca S (m×n, co najwyżej s niezer w kolumnie)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numpy.typing import NDArray

from sketchlab.core.errors import ParameterError, StorageError
from sketchlab.core.rng import Stream, generator
from sketchlab.lowrank.linalg import DenseMatrix, as_dense

Entry = tuple[int, float]


@dataclass(frozen=True)
class SparseSketch:
    """Szkic przechowywany kolumnami jako pary (wiersz, wartość), posortowane po wierszu."""

    m: int
    n: int
    s: int
    columns: tuple[tuple[Entry, ...], ...]

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ParameterError(f"Wymiary szkicu muszą być dodatnie, otrzymano {self.m}×{self.n}")
        if not 1 <= self.s <= self.m:
            raise ParameterError(f"Budżet s musi spełniać 1 ≤ s ≤ m = {self.m}, otrzymano {self.s}")
        if len(self.columns) != self.n:
            raise ParameterError(f"Oczekiwano {self.n} kolumn, otrzymano {len(self.columns)}")
        for j, col in enumerate(self.columns):
            if len(col) > self.s:
                raise ParameterError(f"Kolumna {j} ma {len(col)} niezer, budżet s = {self.s}")
            rows = [row for row, _ in col]
            if rows != sorted(set(rows)):
                raise ParameterError(f"Kolumna {j}: indeksy wierszy muszą być unikalne i rosnące")
            if rows and not (0 <= rows[0] and rows[-1] < self.m):
                raise ParameterError(f"Kolumna {j}: indeks wiersza poza zakresem [0, {self.m})")
            if not all(np.isfinite(value) for _, value in col):
                raise ParameterError(f"Kolumna {j} zawiera wartości nieskończone")

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    @property
    def nnz(self) -> int:
        return sum(len(col) for col in self.columns)

    def support(self) -> NDArray[np.bool_]:
        """Maska m×n pozycji przechowywanych w szkicu."""
        mask = np.zeros((self.m, self.n), dtype=bool)
        for j, col in enumerate(self.columns):
            for row, _ in col:
                mask[row, j] = True
        return mask

    def triplets(self) -> Iterable[tuple[int, int, float]]:
        """(kolumna, wiersz, wartość) w kolejności kanonicznej: kolumnami, potem wierszami."""
        for j, col in enumerate(self.columns):
            for row, value in col:
                yield j, row, value


def _from_dense_columns(dense: DenseMatrix, keep: NDArray[np.bool_], s: int) -> SparseSketch:
    m, n = dense.shape
    cols = tuple(
        tuple((int(row), float(dense[row, j])) for row in np.flatnonzero(keep[:, j]))
        for j in range(n)
    )
    return SparseSketch(m, n, s, cols)


# ── Operacje ──────────────────────────────────────────────


def random_sparse_init(m: int, n: int, s: int, seed: int) -> SparseSketch:
    """Dokładnie s losowych wierszy w każdej kolumnie z wartościami ±1, potem ‖S‖_F = 1."""
    if not 1 <= s <= m:
        raise ParameterError(f"Budżet s musi spełniać 1 ≤ s ≤ m = {m}, otrzymano {s}")
    rng = generator(seed, Stream.SKETCH_INIT)
    value = 1.0 / np.sqrt(n * s)
    cols = []
    for _ in range(n):
        rows = np.sort(rng.choice(m, size=s, replace=False))
        signs = rng.choice(np.array([-1.0, 1.0]), size=s)
        cols.append(tuple((int(row), float(sign * value)) for row, sign in zip(rows, signs)))
    return SparseSketch(m, n, s, tuple(cols))


def top_s_mask(X: DenseMatrix, s: int) -> NDArray[np.bool_]:
    """Maska s największych |x| w każdej kolumnie; remisy na korzyść niższego wiersza."""
    m = X.shape[0]
    if not 1 <= s <= m:
        raise ParameterError(f"Budżet s musi spełniać 1 ≤ s ≤ m = {m}, otrzymano {s}")
    order = np.argsort(-np.abs(X), axis=0, kind="stable")
    mask = np.zeros(X.shape, dtype=bool)
    np.put_along_axis(mask, order[:s], True, axis=0)
    return mask


def hard_threshold(X: DenseMatrix, s: int) -> DenseMatrix:
    """Π_s na gęstej macierzy (wersja używana w pętli IHT)."""
    return np.where(top_s_mask(X, s), X, 0.0)


def project_top_s(S_dense, s: int) -> SparseSketch:
    """Π_s: w każdej kolumnie zostaje s największych co do modułu elementów."""
    S_dense = as_dense(S_dense, "S")
    keep = top_s_mask(S_dense, s) & (S_dense != 0.0)
    return _from_dense_columns(S_dense, keep, s)


def apply(S: SparseSketch, A) -> DenseMatrix:
    """Iloczyn SA kosztem O(ns·d)."""
    A = as_dense(A)
    if A.shape[0] != S.n:
        raise ParameterError(f"Niezgodne wymiary: S ma {S.n} kolumn, A ma {A.shape[0]} wierszy")
    out = np.zeros((S.m, A.shape[1]))
    if S.nnz == 0:
        return out
    cols, rows, vals = (np.array(v) for v in zip(*S.triplets()))
    np.add.at(out, rows.astype(np.intp), vals[:, None] * A[cols.astype(np.intp)])
    return out


def densify(S: SparseSketch) -> DenseMatrix:
    dense = np.zeros((S.m, S.n))
    for j, row, value in S.triplets():
        dense[row, j] = value
    return dense


def sparsify_mask(S_dense, mask, s: int | None = None) -> SparseSketch:
    """Zachowuje elementy S_dense na pozycjach maski (także zera), resztę zeruje."""
    S_dense = as_dense(S_dense, "S")
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != S_dense.shape:
        raise ParameterError(f"Maska {mask.shape} nie pasuje do macierzy {S_dense.shape}")
    per_column = mask.sum(axis=0)
    budget = int(per_column.max(initial=0)) if s is None else s
    budget = max(budget, 1)
    if np.any(per_column > budget):
        raise ParameterError(f"Maska ma {int(per_column.max())} pozycji w kolumnie, budżet s = {budget}")
    return _from_dense_columns(S_dense, mask, budget)


# ── Format tekstowy ───────────────────────────────────────


def dumps(S: SparseSketch) -> str:
    """Nagłówek ``m n s``, potem po linii ``kolumna wiersz wartość`` (repr float)."""
    lines = [f"{S.m} {S.n} {S.s}"]
    lines.extend(f"{j} {row} {value!r}" for j, row, value in S.triplets())
    return "\n".join(lines) + "\n"


def loads(text: str, source: str = "<tekst>") -> SparseSketch:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise StorageError(f"{source}: pusty plik szkicu")
    try:
        m, n, s = (int(tok) for tok in lines[0].split())
        cols: list[list[Entry]] = [[] for _ in range(n)]
        for line in lines[1:]:
            j_tok, row_tok, value_tok = line.split()
            cols[int(j_tok)].append((int(row_tok), float(value_tok)))
    except (ValueError, IndexError) as exc:
        raise StorageError(f"{source}: niepoprawny format szkicu ({exc})") from exc
    try:
        return SparseSketch(m, n, s, tuple(tuple(sorted(col)) for col in cols))
    except ParameterError as exc:
        raise StorageError(f"{source}: {exc}") from exc
