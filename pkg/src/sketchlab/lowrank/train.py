"""Uczenie macierzy szkicujących na stracie zastępczej L̃(S, A) = ‖U_kᵀSᵀSU − I₀‖_F².

Trzy tryby:

- ``fix``: SGD po wartościach na losowym, zamrożonym nośniku,
- ``learn``: IHT z krokiem S ← Π_s(S − η∇L̃), nośnik może się zmieniać,
- ``dense``: SGD po wszystkich elementach.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from loguru import logger

from sketchlab.core.errors import ContractError, DivergenceError, ParameterError
from sketchlab.core.rng import Stream, generator
from sketchlab.lowrank import sketch as sk
from sketchlab.lowrank.linalg import DEFAULT_RANK_TOL, DenseMatrix, as_dense, svd
from sketchlab.lowrank.scw import require_unit_norm, scw_loss


class TrainMode(str, Enum):
    FIX = "fix"
    LEARN = "learn"
    DENSE = "dense"


@dataclass(frozen=True)
class TrainConfig:
    mode: TrainMode
    s: int = 1
    eta: float = 0.1
    iterations: int = 3000
    seed: int = 0
    k: int = 5
    divergence_limit: float = 1e3
    log_every: int = 50
    """Co ile iteracji liczyć średnią stratę SCW na całym zbiorze treningowym (0 = nigdy)."""
    sampled_scw_every: int = 1
    """Co ile iteracji liczyć stratę SCW wylosowanej instancji (0 = nigdy)."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", TrainMode(self.mode))
        if self.eta <= 0:
            raise ParameterError(f"eta musi być > 0, otrzymano {self.eta}")
        if self.iterations < 1:
            raise ParameterError(f"iterations musi być ≥ 1, otrzymano {self.iterations}")
        if self.k < 1:
            raise ParameterError(f"k musi być ≥ 1, otrzymano {self.k}")
        if self.s < 1:
            raise ParameterError(f"s musi być ≥ 1, otrzymano {self.s}")
        for name in ("log_every", "sampled_scw_every"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} musi być ≥ 0, otrzymano {getattr(self, name)}")

    def budget(self, m: int) -> int:
        """Efektywny budżet niezer na kolumnę (dense ignoruje s)."""
        return m if self.mode is TrainMode.DENSE else self.s


@dataclass(frozen=True)
class TrainRecord:
    iteration: int
    surrogate_loss: float
    scw_loss_sampled: float | None
    scw_loss_train_mean: float | None
    max_column_nnz: int


@dataclass
class TrainTrace:
    records: list[TrainRecord]
    final_sketch: sk.SparseSketch
    elapsed_seconds: float = field(default=0.0, compare=False)

    @property
    def final(self) -> TrainRecord:
        return self.records[-1]


StepHook = Callable[[TrainRecord, DenseMatrix], None]


# ── Strata zastępcza ──────────────────────────────────────


@dataclass(frozen=True)
class InstanceFactors:
    """Zwarte U instancji (n×r), liczone raz przed treningiem."""

    U: DenseMatrix
    k: int

    @classmethod
    def of(cls, A, k: int, rank_tol: float = DEFAULT_RANK_TOL) -> "InstanceFactors":
        U = svd(A, rank_tol).U
        if U.shape[1] < k:
            raise ContractError(f"rank(A) = {U.shape[1]} < k = {k}")
        return cls(U=U, k=k)

    def residual(self, S: DenseMatrix) -> tuple[DenseMatrix, DenseMatrix]:
        """(SU, E) z E = U_kᵀSᵀSU − I₀, I₀ kształtu k×r."""
        if S.shape[1] != self.U.shape[0]:
            raise ParameterError(f"Niezgodne wymiary: S ma {S.shape[1]} kolumn, U ma {self.U.shape[0]} wierszy")
        SU = S @ self.U
        E = SU[:, : self.k].T @ SU
        E[:, : self.k] -= np.eye(self.k)
        return SU, E

    def loss(self, S: DenseMatrix) -> float:
        _, E = self.residual(S)
        return float(np.einsum("ij,ij->", E, E))

    def loss_and_grad(self, S: DenseMatrix) -> tuple[float, DenseMatrix]:
        """∇L̃ = 2(SU Eᵀ U_kᵀ + SU_k E Uᵀ)."""
        SU, E = self.residual(S)
        grad = 2.0 * (SU @ (E.T @ self.U[:, : self.k].T) + SU[:, : self.k] @ (E @ self.U.T))
        return float(np.einsum("ij,ij->", E, E)), grad


def _dense_sketch(S) -> DenseMatrix:
    return sk.densify(S) if isinstance(S, sk.SparseSketch) else as_dense(S, "S")


def surrogate_loss(S, A, k: int) -> float:
    return InstanceFactors.of(A, k).loss(_dense_sketch(S))


def surrogate_grad(S, A, k: int) -> DenseMatrix:
    """Analityczny gradient L̃ względem S (macierz m×n)."""
    return InstanceFactors.of(A, k).loss_and_grad(_dense_sketch(S))[1]


# ── Pętle treningowe ──────────────────────────────────────


def _prepare(dataset: Sequence[DenseMatrix], m: int, config: TrainConfig) -> list[InstanceFactors]:
    if not dataset:
        raise ParameterError("Zbiór treningowy jest pusty")
    if m < config.k:
        raise ParameterError(f"Wymiar szkicu m = {m} musi być ≥ k = {config.k}")
    if config.budget(m) > m:
        raise ParameterError(f"Budżet s = {config.s} przekracza m = {m}")
    for i, A in enumerate(dataset):
        require_unit_norm(as_dense(A), f"A[{i}]")
    return [InstanceFactors.of(A, config.k) for A in dataset]


def _initial(dataset, m: int, config: TrainConfig, initial) -> DenseMatrix:
    if initial is not None:
        S = as_dense(initial, "S").copy()
        if S.shape != (m, dataset[0].shape[0]):
            raise ParameterError(f"Szkic startowy ma kształt {S.shape}, oczekiwano {(m, dataset[0].shape[0])}")
        return S
    n = dataset[0].shape[0]
    return sk.densify(sk.random_sparse_init(m, n, config.budget(m), config.seed))


def _due(it: int, every: int, last: int) -> bool:
    """Czy liczyć metrykę SCW w iteracji it (co ``every`` iteracji oraz w ostatniej)."""
    return every > 0 and (it % every == 0 or it == last)


def _loop(
    dataset: Sequence[DenseMatrix],
    m: int,
    config: TrainConfig,
    initial,
    on_step: StepHook | None,
) -> TrainTrace:
    started = time.perf_counter()
    factors = _prepare(dataset, m, config)
    S = _initial(dataset, m, config, initial)
    budget = config.budget(m)
    mask = S != 0.0 if config.mode is TrainMode.FIX else None
    rng = generator(config.seed, Stream.TRAINER)

    records: list[TrainRecord] = []
    for it in range(1, config.iterations + 1):
        idx = int(rng.integers(len(dataset)))
        _, grad = factors[idx].loss_and_grad(S)
        step = S - config.eta * grad
        if config.mode is TrainMode.FIX:
            S = np.where(mask, step, 0.0)
        elif config.mode is TrainMode.LEARN:
            S = sk.hard_threshold(step, budget)
        else:
            S = step

        surrogate = factors[idx].loss(S)
        if not np.isfinite(surrogate) or surrogate > config.divergence_limit:
            raise DivergenceError(
                f"Trening {config.mode.value} (s={config.s}, ziarno {config.seed}) rozbiegł się w iteracji "
                f"{it}: L̃ = {surrogate:.3g} > {config.divergence_limit:g}"
            )
        train_mean = sampled = None
        if _due(it, config.log_every, config.iterations):
            train_mean = float(np.mean([scw_loss(S, A, config.k) for A in dataset]))
        if _due(it, config.sampled_scw_every, config.iterations):
            sampled = scw_loss(S, dataset[idx], config.k)
        record = TrainRecord(
            iteration=it,
            surrogate_loss=surrogate,
            scw_loss_sampled=sampled,
            scw_loss_train_mean=train_mean,
            max_column_nnz=int(np.count_nonzero(S, axis=0).max()),
        )
        records.append(record)
        if on_step is not None:
            on_step(record, S)

    if config.mode is TrainMode.FIX:
        final = sk.sparsify_mask(S, mask, budget)
    elif config.mode is TrainMode.LEARN:
        final = sk.project_top_s(S, budget)
    else:
        final = sk.sparsify_mask(S, np.ones_like(S, dtype=bool), m)
    elapsed = time.perf_counter() - started
    logger.debug(
        f"Trening {config.mode.value} (s={config.s}) zakończony po {config.iterations} iteracjach "
        f"w {elapsed:.2f} s, L̃ = {records[-1].surrogate_loss:.4g}"
    )
    return TrainTrace(records=records, final_sketch=final, elapsed_seconds=elapsed)


def sgd_train(
    dataset: Sequence[DenseMatrix],
    m: int,
    config: TrainConfig,
    initial=None,
    on_step: StepHook | None = None,
) -> TrainTrace:
    """SGD dla trybów fix (maska nośnika startowego) i dense."""
    if config.mode not in (TrainMode.FIX, TrainMode.DENSE):
        raise ParameterError(f"sgd_train obsługuje tryby fix i dense, otrzymano {config.mode.value}")
    return _loop(dataset, m, config, initial, on_step)


def iht_train(
    dataset: Sequence[DenseMatrix],
    m: int,
    config: TrainConfig,
    initial=None,
    on_step: StepHook | None = None,
) -> TrainTrace:
    """IHT: krok gradientowy, potem Π_s."""
    if config.mode is not TrainMode.LEARN:
        raise ParameterError(f"iht_train obsługuje tylko tryb learn, otrzymano {config.mode.value}")
    return _loop(dataset, m, config, initial, on_step)


def train(
    dataset: Sequence[DenseMatrix],
    m: int,
    config: TrainConfig,
    initial=None,
    on_step: StepHook | None = None,
) -> TrainTrace:
    trainer = iht_train if config.mode is TrainMode.LEARN else sgd_train
    return trainer(dataset, m, config, initial, on_step)
